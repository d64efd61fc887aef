// SPDX-License-Identifier: Apache-2.0
//
// Fine-grid Wiener increments shared by every step size of one Monte Carlo
// sample, and the coarse increments (plain and OU-convolved) read from them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "avf/linalg.hpp"

namespace avf {

class PathHierarchy {
 public:
  /// Standard Gaussians scaled by sqrt(h_ref); deterministic in all arguments.
  /// Throws std::invalid_argument unless T / h_ref is a positive integer.
  static PathHierarchy generate(std::uint64_t seed, std::uint64_t sample,
                                double T, double h_ref, int d);

  [[nodiscard]] double final_time() const { return T_; }
  [[nodiscard]] double h_ref() const { return h_ref_; }
  [[nodiscard]] int noise_dim() const { return d_; }
  [[nodiscard]] std::size_t fine_steps() const { return n_ref_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t sample() const { return sample_; }

  /// Fine increment j in noise direction k.
  [[nodiscard]] double increment(std::size_t j, int k) const {
    return increments_[j * d_ + k];
  }
  [[nodiscard]] std::span<const double> increments() const { return increments_; }

  /// Adds `eps` to fine increment j, direction k (finite-difference probes).
  void bump(std::size_t j, int k, double eps);

  /// Number of fine steps per coarse step h; throws unless h/h_ref is a
  /// positive integer and h divides T.
  [[nodiscard]] std::size_t ratio_for(double h) const;

 private:
  double T_ = 0.0;
  double h_ref_ = 0.0;
  int d_ = 0;
  std::size_t n_ref_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t sample_ = 0;
  std::vector<double> increments_;
};

inline PathHierarchy generate_path(std::uint64_t seed, double T, double h_ref, int d,
                                   std::uint64_t sample = 0) {
  return PathHierarchy::generate(seed, sample, T, h_ref, d);
}

struct OUIncrement {
  NoiseVec plain;      // W(t_{n+1}) - W(t_n)
  NoiseVec convolved;  // sum_j exp(-v (t_{n+1} - s_{j+1})) dW_j
};

/// Right-endpoint exponential weights exp(-v h_ref (ratio - 1 - j)),
/// j = 0..ratio-1, for one coarse step.
std::vector<double> ou_weights(double v, double h_ref, std::size_t ratio);

/// Increment over [n h, (n+1) h]. Throws std::out_of_range past T.
OUIncrement coarse_increment(const PathHierarchy& path, std::size_t n, double h,
                             double v);
/// Same with precomputed ou_weights (weights.size() is the ratio).
OUIncrement coarse_increment(const PathHierarchy& path, std::size_t n,
                             std::span<const double> weights);

/// (1 - exp(-2 v h)) / (2 v): variance multiplier of the exact OU convolution.
double ou_variance_factor(double v, double h);

/// True if x is (to rounding) a positive integer power of two times `unit`.
bool is_power_of_two_multiple(double x, double unit);

}  // namespace avf
