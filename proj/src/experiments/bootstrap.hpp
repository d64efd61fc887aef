// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace avf::detail {

/// RMS errors of `replicates` bootstrap resamples over samples:
/// out[b][i] = sqrt(mean_s sq_errors[i][idx_b(s)]). Resampling indices are
/// drawn from a counter-based stream keyed by `seed`.
std::vector<std::vector<double>> bootstrap_rms(
    const std::vector<std::vector<double>>& sq_errors, std::uint64_t seed,
    std::size_t replicates);

}  // namespace avf::detail
