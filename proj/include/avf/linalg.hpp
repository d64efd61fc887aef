// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace avf {

// Configuration-space dimension m is capped so that phase-space matrices
// (2m x 2m) stay on the stack.
inline constexpr int kMaxConfigDim = 4;
inline constexpr int kMaxPhaseDim = 2 * kMaxConfigDim;
inline constexpr int kMaxNoiseDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxConfigDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                          kMaxConfigDim, kMaxConfigDim>;
using NoiseVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxNoiseDim, 1>;
using NoiseMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                               kMaxConfigDim, kMaxNoiseDim>;
using PhaseVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPhaseDim, 1>;
using PhaseMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0,
                               kMaxPhaseDim, kMaxPhaseDim>;

}  // namespace avf
