// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <stdexcept>
#include <string>

#include "avf/noise.hpp"
#include "avf/philox.hpp"

namespace avf {
namespace {

// Returns round(x) if x is within relative 1e-9 of a positive integer, else 0.
std::size_t integral_ratio(double x) {
  if (!(x >= 0.5) || !std::isfinite(x)) return 0;
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9 * r) return 0;
  return static_cast<std::size_t>(r);
}

// Pairwise sum of fine increments [first, first + count) in direction k.
// Halving at count/2 makes aligned power-of-two windows nest exactly:
// the sum over a 2h window is bitwise the sum of its two h halves.
double pairwise_sum(std::span<const double> fine, int d, int k, std::size_t first,
                    std::size_t count) {
  if (count == 1) return fine[first * d + k];
  const std::size_t half = count / 2;
  return pairwise_sum(fine, d, k, first, half) +
         pairwise_sum(fine, d, k, first + half, count - half);
}

}  // namespace

bool is_power_of_two_multiple(double x, double unit) {
  const std::size_t r = integral_ratio(x / unit);
  return r != 0 && (r & (r - 1)) == 0;
}

PathHierarchy PathHierarchy::generate(std::uint64_t seed, std::uint64_t sample,
                                      double T, double h_ref, int d) {
  if (!(T > 0.0) || !(h_ref > 0.0))
    throw std::invalid_argument("T and h_ref must be positive");
  if (d < 1 || d > kMaxNoiseDim)
    throw std::invalid_argument("noise dimension out of range");
  const std::size_t n_ref = integral_ratio(T / h_ref);
  if (n_ref == 0)
    throw std::invalid_argument("T / h_ref must be a positive integer");

  PathHierarchy path;
  path.T_ = T;
  path.h_ref_ = h_ref;
  path.d_ = d;
  path.n_ref_ = n_ref;
  path.seed_ = seed;
  path.sample_ = sample;
  path.increments_.resize(n_ref * static_cast<std::size_t>(d));

  const CounterRng rng(seed, sample);
  const double scale = std::sqrt(h_ref);
  const std::size_t total = path.increments_.size();
  for (std::size_t i = 0; i < total; i += 2) {
    const auto z = rng.normal_pair(i / 2);
    path.increments_[i] = scale * z[0];
    if (i + 1 < total) path.increments_[i + 1] = scale * z[1];
  }
  return path;
}

void PathHierarchy::bump(std::size_t j, int k, double eps) {
  if (j >= n_ref_ || k < 0 || k >= d_) throw std::out_of_range("bump index out of range");
  increments_[j * d_ + k] += eps;
}

std::size_t PathHierarchy::ratio_for(double h) const {
  const std::size_t ratio = integral_ratio(h / h_ref_);
  if (ratio == 0)
    throw std::invalid_argument("step " + std::to_string(h) +
                                " is not a multiple of h_ref");
  if (n_ref_ % ratio != 0)
    throw std::invalid_argument("step " + std::to_string(h) + " does not divide T");
  return ratio;
}

std::vector<double> ou_weights(double v, double h_ref, std::size_t ratio) {
  std::vector<double> w(ratio);
  for (std::size_t j = 0; j < ratio; ++j)
    w[j] = std::exp(-v * h_ref * static_cast<double>(ratio - 1 - j));
  return w;
}

OUIncrement coarse_increment(const PathHierarchy& path, std::size_t n,
                             std::span<const double> weights) {
  const std::size_t ratio = weights.size();
  const std::size_t first = n * ratio;
  if (ratio == 0 || first + ratio > path.fine_steps())
    throw std::out_of_range("coarse window outside [0, T]");
  const int d = path.noise_dim();
  OUIncrement inc{NoiseVec::Zero(d), NoiseVec::Zero(d)};
  const auto fine = path.increments();
  for (int k = 0; k < d; ++k) inc.plain[k] = pairwise_sum(fine, d, k, first, ratio);
  for (std::size_t j = 0; j < ratio; ++j) {
    const double* dw = fine.data() + (first + j) * d;
    for (int k = 0; k < d; ++k) inc.convolved[k] += weights[j] * dw[k];
  }
  return inc;
}

OUIncrement coarse_increment(const PathHierarchy& path, std::size_t n, double h,
                             double v) {
  const auto w = ou_weights(v, path.h_ref(), path.ratio_for(h));
  return coarse_increment(path, n, w);
}

double ou_variance_factor(double v, double h) {
  if (!(v > 0.0) || !(h > 0.0))
    throw std::invalid_argument("ou_variance_factor needs v > 0 and h > 0");
  return -std::expm1(-2.0 * v * h) / (2.0 * v);
}

}  // namespace avf
