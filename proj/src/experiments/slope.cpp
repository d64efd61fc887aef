// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avf/experiments.hpp"
#include "avf/philox.hpp"
#include "avf/stats.hpp"
#include "experiments/bootstrap.hpp"

namespace avf {

namespace detail {

std::vector<std::vector<double>> bootstrap_rms(
    const std::vector<std::vector<double>>& sq_errors, std::uint64_t seed,
    std::size_t replicates) {
  const std::size_t samples = sq_errors.empty() ? 0 : sq_errors.front().size();
  std::vector<std::vector<double>> out(replicates, std::vector<double>(sq_errors.size()));
  if (samples == 0) return out;
  std::vector<std::size_t> idx(samples);
  std::vector<double> resampled(samples);
  for (std::size_t b = 0; b < replicates; ++b) {
    const CounterRng draw(seed ^ 0xB0075784A9ULL, b);
    for (std::size_t s = 0; s < samples; ++s) {
      const double u = draw.uniform(s / 2, static_cast<int>(s % 2));
      idx[s] = std::min(samples - 1, static_cast<std::size_t>(u * static_cast<double>(samples)));
    }
    for (std::size_t i = 0; i < sq_errors.size(); ++i) {
      for (std::size_t s = 0; s < samples; ++s) resampled[s] = sq_errors[i][idx[s]];
      out[b][i] = std::sqrt(pairwise_sum(resampled) / static_cast<double>(samples));
    }
  }
  return out;
}

}  // namespace detail

SlopeFit fit_slope(const std::vector<double>& h_values, const std::vector<double>& errors) {
  for (double e : errors)
    if (!(e > 0.0)) throw std::invalid_argument("fit_slope: errors must be positive");
  const LineFit fit = fit_loglog(h_values, errors);
  return {fit.slope, fit.intercept, fit.slope, fit.slope};
}

SlopeFit fit_slope(const std::vector<double>& h_values,
                   const std::vector<std::vector<double>>& sq_errors, std::uint64_t seed,
                   std::size_t replicates) {
  if (sq_errors.size() != h_values.size())
    throw std::invalid_argument("fit_slope: one error row per step size expected");
  const std::size_t samples = sq_errors.empty() ? 0 : sq_errors.front().size();
  if (samples == 0) throw std::invalid_argument("fit_slope: no samples");
  for (const auto& row : sq_errors)
    if (row.size() != samples) throw std::invalid_argument("fit_slope: ragged error rows");

  std::vector<double> rms(h_values.size());
  for (std::size_t i = 0; i < h_values.size(); ++i)
    rms[i] = std::sqrt(pairwise_sum(sq_errors[i]) / static_cast<double>(samples));
  SlopeFit out = fit_slope(h_values, rms);

  std::vector<double> slopes;
  for (const auto& boot : detail::bootstrap_rms(sq_errors, seed, replicates)) {
    if (std::all_of(boot.begin(), boot.end(), [](double e) { return e > 0.0; }))
      slopes.push_back(fit_loglog(h_values, boot).slope);
  }
  if (!slopes.empty()) {
    out.ci_low = quantile(slopes, 0.025);
    out.ci_high = quantile(slopes, 0.975);
  }
  return out;
}

}  // namespace avf
