// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "avf/density.hpp"
#include "avf/parallel.hpp"
#include "avf/philox.hpp"
#include "avf/stats.hpp"

namespace avf {

DensityConvergence density_convergence(const LangevinModel& model, std::vector<double> h_list,
                                       const RunSettings& settings, double bandwidth_scale,
                                       int nodes_per_axis, std::size_t replicates) {
  model.validate();
  if (settings.samples < 2) throw std::invalid_argument("density_convergence needs M >= 2");
  if (!(bandwidth_scale > 0.0)) throw std::invalid_argument("bandwidth scale must be positive");
  h_list = checked_step_ladder(std::move(h_list), settings.h_ref, settings.T);
  const std::size_t n_h = h_list.size();
  const int dim = 2 * model.m;
  const int nodes = nodes_per_axis > 0 ? nodes_per_axis : default_nodes_per_axis(dim);

  std::vector<AvfConfig> configs;
  for (double h : h_list) configs.emplace_back(model, h, settings.solver);
  const AvfConfig ref_cfg(model, settings.h_ref, settings.solver);

  // terminal[s] = {reference, avf at h_0, ..., avf at h_{n-1}}; empty on failure.
  std::vector<std::vector<PhaseVec>> terminal(settings.samples);
  parallel_for(settings.samples, settings.threads, [&](std::size_t s) {
    try {
      const PathHierarchy path =
          PathHierarchy::generate(settings.seed, s, settings.T, settings.h_ref, model.d);
      std::vector<PhaseVec> row;
      row.push_back(integrate_terminal(model, Scheme::tamed_euler, path, ref_cfg).stacked());
      for (const auto& cfg : configs)
        row.push_back(integrate_terminal(model, Scheme::avf_split, path, cfg).stacked());
      terminal[s] = std::move(row);
    } catch (const IntegrationFailure&) {
      terminal[s].clear();
    }
  });

  DensityConvergence out;
  out.h_values = h_list;
  std::vector<std::vector<PhaseVec>> columns(n_h + 1);
  for (const auto& row : terminal) {
    if (row.empty()) {
      ++out.failures;
      continue;
    }
    for (std::size_t c = 0; c <= n_h; ++c) columns[c].push_back(row[c]);
  }
  if (static_cast<double>(out.failures) >
      settings.max_failure_fraction * static_cast<double>(settings.samples)) {
    std::ostringstream os;
    os << out.failures << " of " << settings.samples << " samples failed";
    throw ExperimentAbort(os.str());
  }
  out.sample_count = columns[0].size();
  if (out.sample_count < 2) throw ExperimentAbort("fewer than two successful samples");

  const std::size_t count = out.sample_count;
  std::vector<PhaseVec> boot_ref(count), boot_avf(count);
  for (std::size_t i = 0; i < n_h; ++i) {
    const double rho = bandwidth_scale * h_list[i];
    const DensityGrid grid = grid_for_samples(columns[0], rho, nodes);
    const DensityGrid ref = kde(columns[0], grid, rho, settings.threads);
    const DensityGrid avf = kde(columns[i + 1], grid, rho, settings.threads);
    out.bandwidths.push_back(rho);
    out.distances.push_back(density_distance(avf, ref));
    out.reference_mass.push_back(ref.mass());

    // Joint bootstrap over coupled (reference, AVF) sample pairs.
    std::vector<double> boot;
    for (std::size_t b = 0; b < replicates; ++b) {
      const CounterRng draw(settings.seed ^ 0xDE45171ULL, b);
      for (std::size_t s = 0; s < count; ++s) {
        const double u = draw.uniform(s / 2, static_cast<int>(s % 2));
        const std::size_t j =
            std::min(count - 1, static_cast<std::size_t>(u * static_cast<double>(count)));
        boot_ref[s] = columns[0][j];
        boot_avf[s] = columns[i + 1][j];
      }
      boot.push_back(density_distance(kde(boot_avf, grid, rho, settings.threads),
                                      kde(boot_ref, grid, rho, settings.threads)));
    }
    out.ci_low.push_back(boot.empty() ? out.distances.back() : quantile(boot, 0.025));
    out.ci_high.push_back(boot.empty() ? out.distances.back() : quantile(boot, 0.975));

    if (i + 1 == n_h) {
      out.finest_avf = avf;
      out.finest_reference = ref;
    }
  }

  if (n_h >= 2 && std::all_of(out.distances.begin(), out.distances.end(),
                              [](double v) { return v > 0.0; })) {
    const LineFit fit = fit_loglog(out.h_values, out.distances);
    out.fitted_slope = fit.slope;
    out.intercept = fit.intercept;
  } else {
    out.fitted_slope = out.intercept = std::nan("");
  }
  bool covered = true;
  for (std::size_t i = 0; i + 1 < n_h; ++i) {
    if (!(out.distances[i + 1] < out.distances[i])) {
      ++out.inversions;
      covered = covered && out.ci_low[i + 1] <= out.ci_high[i];
    }
  }
  out.decreasing = out.inversions == 0 || (out.inversions == 1 && covered);
  return out;
}

}  // namespace avf
