// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "avf/experiments.hpp"
#include "avf/parallel.hpp"
#include "avf/stats.hpp"
#include "experiments/bootstrap.hpp"

namespace avf {

std::vector<double> checked_step_ladder(std::vector<double> h_list, double h_ref, double T) {
  if (h_list.empty()) throw std::invalid_argument("step list is empty");
  if (!(h_ref > 0.0) || !(T > 0.0)) throw std::invalid_argument("h_ref and T must be positive");
  const double fine = T / h_ref;
  if (fine < 0.5 || std::abs(fine - std::round(fine)) > 1e-9 * fine)
    throw std::invalid_argument("h_ref must divide T");
  std::sort(h_list.begin(), h_list.end(), std::greater<>());
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    const double h = h_list[i];
    std::ostringstream os;
    os << "step " << h;
    if (!is_power_of_two_multiple(h, h_ref))
      throw std::invalid_argument(os.str() + " is not a power-of-two multiple of h_ref");
    const double steps = T / h;
    if (!(h <= T) || std::abs(steps - std::round(steps)) > 1e-9 * steps)
      throw std::invalid_argument(os.str() + " does not divide T");
    if (i > 0 && !(h < h_list[i - 1]))
      throw std::invalid_argument(os.str() + " is repeated");
  }
  return h_list;
}

namespace {

struct SampleOutcome {
  bool ok = true;
  std::vector<double> sq_errors;
  double max_drift = 0.0;
  std::size_t violations = 0;
};

}  // namespace

ConvergenceResult strong_error(const LangevinModel& model, std::vector<double> h_list,
                               const RunSettings& settings, Scheme scheme) {
  model.validate();
  if (settings.samples < 2) throw std::invalid_argument("strong_error needs M >= 2 samples");
  h_list = checked_step_ladder(std::move(h_list), settings.h_ref, settings.T);

  std::vector<AvfConfig> configs;
  for (double h : h_list) configs.emplace_back(model, h, settings.solver);
  const AvfConfig ref_cfg(model, settings.h_ref, settings.solver);
  const std::size_t n_h = h_list.size();

  std::vector<SampleOutcome> outcomes(settings.samples);
  parallel_for(settings.samples, settings.threads, [&](std::size_t s) {
    SampleOutcome& out = outcomes[s];
    out.sq_errors.assign(n_h, 0.0);
    try {
      const PathHierarchy path =
          PathHierarchy::generate(settings.seed, s, settings.T, settings.h_ref, model.d);
      const PhaseVec ref =
          integrate_terminal(model, Scheme::tamed_euler, path, ref_cfg).stacked();
      for (std::size_t i = 0; i < n_h; ++i) {
        double prev_h = hamiltonian(model, model.x0);
        StepObserver audit;
        if (scheme == Scheme::avf_split) {
          audit = [&](std::size_t, const StepRecord& rec) {
            const double drift = std::abs(hamiltonian(model, rec.x_bar) - prev_h);
            out.max_drift = std::max(out.max_drift, drift);
            if (drift > settings.energy_tolerance) ++out.violations;
            prev_h = hamiltonian(model, rec.x);
          };
        }
        const PhaseVec x = integrate_terminal(model, scheme, path, configs[i], audit).stacked();
        out.sq_errors[i] = (x - ref).squaredNorm();
      }
    } catch (const IntegrationFailure&) {
      out.ok = false;
    }
  });

  ConvergenceResult result;
  result.h_values = h_list;
  std::vector<std::vector<double>> sq(n_h);
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++result.failures;
      continue;
    }
    for (std::size_t i = 0; i < n_h; ++i) sq[i].push_back(o.sq_errors[i]);
    result.max_energy_drift = std::max(result.max_energy_drift, o.max_drift);
    result.energy_violations += o.violations;
  }
  if (static_cast<double>(result.failures) >
      settings.max_failure_fraction * static_cast<double>(settings.samples)) {
    std::ostringstream os;
    os << result.failures << " of " << settings.samples
       << " samples failed (Newton divergence or non-finite state)";
    throw ExperimentAbort(os.str());
  }
  result.sample_count = settings.samples - result.failures;
  if (result.sample_count == 0) throw ExperimentAbort("no successful samples");

  const double count = static_cast<double>(result.sample_count);
  for (std::size_t i = 0; i < n_h; ++i)
    result.rms_errors.push_back(std::sqrt(pairwise_sum(sq[i]) / count));

  const auto boot = detail::bootstrap_rms(sq, settings.seed, settings.bootstrap_replicates);
  for (std::size_t i = 0; i < n_h; ++i) {
    std::vector<double> column;
    for (const auto& b : boot) column.push_back(b[i]);
    result.ci_low.push_back(column.empty() ? result.rms_errors[i] : quantile(column, 0.025));
    result.ci_high.push_back(column.empty() ? result.rms_errors[i] : quantile(column, 0.975));
  }

  const bool fittable =
      n_h >= 2 && std::all_of(result.rms_errors.begin(), result.rms_errors.end(),
                              [](double e) { return e > 0.0 && std::isfinite(e); });
  if (fittable) {
    const SlopeFit fit = fit_slope(h_list, sq, settings.seed, settings.bootstrap_replicates);
    result.fitted_slope = fit.slope;
    result.intercept = fit.intercept;
    result.slope_ci_low = fit.ci_low;
    result.slope_ci_high = fit.ci_high;
  } else {
    result.fitted_slope = result.intercept = std::numeric_limits<double>::quiet_NaN();
    result.slope_ci_low = result.slope_ci_high = result.fitted_slope;
  }

  bool covered = true;
  for (std::size_t i = 0; i + 1 < n_h; ++i) {
    if (result.rms_errors[i + 1] > result.rms_errors[i]) {
      ++result.inversions;
      covered = covered && result.ci_low[i + 1] <= result.ci_high[i];
    }
  }
  result.monotone = result.inversions == 0 || (result.inversions == 1 && covered);
  return result;
}

}  // namespace avf
