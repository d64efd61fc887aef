// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "avf/experiments.hpp"
#include "avf/parallel.hpp"
#include "avf/stats.hpp"

namespace avf {

double energy_audit(const LangevinModel& model, const PathHierarchy& path, double h,
                    const SolverOptions& solver) {
  const AvfConfig cfg(model, h, solver);
  double prev = hamiltonian(model, model.x0);
  double worst = 0.0;
  integrate_terminal(model, Scheme::avf_split, path, cfg,
                     [&](std::size_t, const StepRecord& rec) {
                       worst = std::max(worst, std::abs(hamiltonian(model, rec.x_bar) - prev));
                       prev = hamiltonian(model, rec.x);
                     });
  return worst;
}

double MonitorSeries::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double min_admissible_beta(const LangevinModel& model) {
  return std::max(model.noise_energy() - 2.0 * model.friction, 1e-12);
}

MonitorSeries exp_moment_monitor(const LangevinModel& model, double h, double beta,
                                 const RunSettings& settings) {
  model.validate();
  if (!(beta >= min_admissible_beta(model)))
    throw std::invalid_argument("beta = " + std::to_string(beta) +
                                " is below the admissible minimum " +
                                std::to_string(min_admissible_beta(model)));
  if (settings.samples < 1) throw std::invalid_argument("monitor needs samples >= 1");
  checked_step_ladder({h}, settings.h_ref, settings.T);
  const AvfConfig cfg(model, h, settings.solver);
  const auto steps = static_cast<std::size_t>(std::llround(settings.T / h));
  constexpr double kLogMax = 709.0;  // exp() stays finite below this

  // log of exp(U(X_n) e^{-beta t_n}) per sample and grid time; NaN marks exclusion.
  std::vector<std::vector<double>> logs(settings.samples);
  parallel_for(settings.samples, settings.threads, [&](std::size_t s) {
    auto& row = logs[s];
    try {
      const PathHierarchy path =
          PathHierarchy::generate(settings.seed, s, settings.T, settings.h_ref, model.d);
      const Trajectory traj = integrate(model, Scheme::avf_split, path, cfg);
      row.resize(traj.size());
      for (std::size_t n = 0; n < traj.size(); ++n) {
        const double t = static_cast<double>(n) * h;
        row[n] = hamiltonian(model, traj[n]) * std::exp(-beta * t);
        if (!(row[n] <= kLogMax)) {
          row.clear();
          return;
        }
      }
    } catch (const IntegrationFailure&) {
      row.clear();
    }
  });

  MonitorSeries series;
  series.bound = std::exp(model.noise_energy() / (2.0 * beta) + hamiltonian(model, model.x0));
  std::vector<const std::vector<double>*> kept;
  for (const auto& row : logs) {
    if (row.empty()) {
      ++series.excluded;
    } else {
      kept.push_back(&row);
    }
  }
  series.samples = kept.size();
  if (kept.empty()) throw ExperimentAbort("every monitor sample overflowed or failed");

  // log-sum-exp per grid time, fixed sample order.
  std::vector<double> shifted(kept.size());
  for (std::size_t n = 0; n <= steps; ++n) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto* row : kept) top = std::max(top, (*row)[n]);
    for (std::size_t s = 0; s < kept.size(); ++s) shifted[s] = std::exp((*kept[s])[n] - top);
    const double mean = pairwise_sum(shifted) / static_cast<double>(kept.size());
    series.times.push_back(static_cast<double>(n) * h);
    series.values.push_back(std::exp(top + std::log(mean)));
  }
  return series;
}

}  // namespace avf
