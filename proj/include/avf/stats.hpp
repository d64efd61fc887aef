// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace avf {

/// Pairwise (cascade) summation in index order; deterministic for a given input.
double pairwise_sum(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of log(y) on log(x). Throws std::invalid_argument
/// for fewer than two points or nonpositive entries.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Linear-interpolated quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double p);

}  // namespace avf
