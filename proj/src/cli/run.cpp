// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "avf/config.hpp"
#include "avf/density.hpp"
#include "avf/experiments.hpp"
#include "avf/malliavin.hpp"
#include "avf/output.hpp"
#include "avf/parallel.hpp"
#include "avf/philox.hpp"
#include "avf/stats.hpp"

namespace avf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Stream id for the finite-difference probe selection.
constexpr std::uint64_t kFdStream = 0x6664636865636bULL;

struct Context {
  const RunConfig& cfg;
  ExperimentKind kind;
  std::uint64_t seed;
  unsigned threads;
  fs::path dir;
  std::ostream& log;
  json summary;

  [[nodiscard]] RunSettings settings() const {
    RunSettings s;
    s.T = cfg.experiment.T;
    s.h_ref = cfg.experiment.h_ref;
    s.samples = cfg.experiment.samples;
    s.seed = seed;
    s.threads = threads;
    s.solver = cfg.solver;
    s.bootstrap_replicates = cfg.experiment.bootstrap;
    return s;
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    if (!cfg.output.csv) return;
    write_csv(dir / name, header, rows);
    summary["artifacts"].push_back(name);
  }

  [[nodiscard]] std::vector<double> ladder() const {
    return checked_step_ladder(cfg.experiment.h_list, cfg.experiment.h_ref, cfg.experiment.T);
  }
};

json vec_json(const auto& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// json cannot hold NaN; null stands in.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void echo_inputs(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  json& s = ctx.summary;
  s["experiment"] = std::string(to_string(ctx.kind));
  s["config_hash"] = git_blob_hash(c.source);
  s["potential"] = c.model.potential.name();
  s["m"] = c.model.m;
  s["d"] = c.model.d;
  s["v"] = c.model.friction;
  json sigma = json::array();
  for (int i = 0; i < c.model.m; ++i)
    for (int k = 0; k < c.model.d; ++k) sigma.push_back(c.model.sigma(i, k));
  s["sigma"] = sigma;
  s["x0"] = vec_json(c.model.x0.stacked());
  s["c0"] = c.model.potential.lower_offset();
  s["hessian_lower_bound"] = c.model.potential.hessian_lower_bound();
  s["scheme"] = std::string(to_string(c.scheme));
  s["taming"] = std::string(to_string(c.solver.taming));
  s["newton_tol"] = c.solver.newton_tol;
  s["newton_max_iter"] = c.solver.newton_max_iter;
  s["quadrature_nodes"] = c.solver.quadrature_nodes;
  s["t_final"] = c.experiment.T;
  s["h_list"] = c.experiment.h_list;
  s["h_ref"] = c.experiment.h_ref;
  s["samples"] = c.experiment.samples;
  s["seed"] = ctx.seed;
  s["artifacts"] = json::array();
}

void simulate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto hs = ctx.ladder();
  const double h = hs.back();
  const AvfConfig acfg(c.model, h, c.solver);
  const PathHierarchy path =
      PathHierarchy::generate(ctx.seed, 0, c.experiment.T, c.experiment.h_ref, c.model.d);
  int max_iters = 0;
  const Trajectory traj = integrate(c.model, c.scheme, path, acfg,
                                    [&](std::size_t, const StepRecord& rec) {
                                      max_iters = std::max(max_iters, rec.newton_iters);
                                    });
  std::vector<std::string> header{"t"};
  for (int i = 0; i < c.model.m; ++i) header.push_back("p" + std::to_string(i + 1));
  for (int i = 0; i < c.model.m; ++i) header.push_back("q" + std::to_string(i + 1));
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const PhaseVec x = traj[n].stacked();
    std::vector<double> row{static_cast<double>(n) * h};
    row.insert(row.end(), x.data(), x.data() + x.size());
    rows.push_back(std::move(row));
  }
  ctx.csv("trajectory.csv", header, rows);
  ctx.summary["h"] = h;
  ctx.summary["steps"] = traj.size() - 1;
  ctx.summary["terminal_state"] = vec_json(traj.back().stacked());
  ctx.summary["max_newton_iterations"] = max_iters;
  ctx.summary["initial_energy"] = hamiltonian(c.model, traj.front());
  ctx.summary["terminal_energy"] = hamiltonian(c.model, traj.back());
  ctx.summary["finite_pass"] = true;
}

void converge_strong(Context& ctx) {
  const auto hs = ctx.ladder();
  const ConvergenceResult r = strong_error(ctx.cfg.model, hs, ctx.settings(), ctx.cfg.scheme);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.h_values.size(); ++i)
    rows.push_back({r.h_values[i], r.rms_errors[i], r.ci_low[i], r.ci_high[i]});
  ctx.csv("convergence.csv", {"h", "rms_error", "ci_low", "ci_high"}, rows);
  json& s = ctx.summary;
  s["fitted_slope"] = num(r.fitted_slope);
  s["intercept"] = num(r.intercept);
  s["slope_ci_low"] = num(r.slope_ci_low);
  s["slope_ci_high"] = num(r.slope_ci_high);
  s["sample_count"] = r.sample_count;
  s["failures"] = r.failures;
  s["max_energy_drift"] = r.max_energy_drift;
  s["energy_violations"] = r.energy_violations;
  s["inversions"] = r.inversions;
  s["monotone_pass"] = r.monotone;
  s["energy_pass"] = r.energy_violations == 0;
  s["slope_pass"] = std::abs(r.fitted_slope - 1.0) <= 0.15;
  ctx.log << "fitted slope " << r.fitted_slope << " [" << r.slope_ci_low << ", "
          << r.slope_ci_high << "], " << r.sample_count << " samples\n";
}

void converge_density(Context& ctx) {
  const auto hs = ctx.ladder();
  const ExperimentSection& e = ctx.cfg.experiment;
  const DensityConvergence r = density_convergence(ctx.cfg.model, hs, ctx.settings(),
                                                   e.bandwidth_scale, e.grid_nodes, e.bootstrap);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.h_values.size(); ++i)
    rows.push_back({r.h_values[i], r.bandwidths[i], r.distances[i], r.ci_low[i], r.ci_high[i],
                    r.reference_mass[i]});
  ctx.csv("density_convergence.csv",
          {"h", "bandwidth", "sup_distance", "ci_low", "ci_high", "reference_mass"}, rows);
  if (ctx.cfg.output.csv && r.finest_avf.dim() <= 2) {
    write_density_csv(ctx.dir / "density_avf.csv", r.finest_avf);
    write_density_csv(ctx.dir / "density_reference.csv", r.finest_reference);
    ctx.summary["artifacts"].push_back("density_avf.csv");
    ctx.summary["artifacts"].push_back("density_reference.csv");
  }
  write_density_binary(ctx.dir / "density_avf.bin", r.finest_avf);
  write_density_binary(ctx.dir / "density_reference.bin", r.finest_reference);
  ctx.summary["artifacts"].push_back("density_avf.bin");
  ctx.summary["artifacts"].push_back("density_reference.bin");
  json& s = ctx.summary;
  s["distance_kind"] = "kde_sup_surrogate";
  s["bandwidth_scale"] = e.bandwidth_scale;
  s["grid_nodes_per_axis"] = r.finest_avf.axes.empty() ? 0 : r.finest_avf.axes[0].size();
  s["fitted_slope"] = num(r.fitted_slope);
  s["intercept"] = num(r.intercept);
  s["sample_count"] = r.sample_count;
  s["failures"] = r.failures;
  s["inversions"] = r.inversions;
  s["decreasing_pass"] = r.decreasing;
  s["slope_pass"] = r.fitted_slope >= 0.5;
  ctx.log << "density slope " << r.fitted_slope << ", inversions " << r.inversions << "\n";
}

void malliavin_diagnose(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ExperimentSection& e = c.experiment;
  const auto hs = ctx.ladder();
  const std::size_t M = e.samples;

  struct Outcome {
    bool ok = true;
    CovarianceDiagnostics diag;
  };
  std::vector<GammaSamples> data;
  std::vector<std::vector<double>> rows;
  std::size_t failures = 0, rank_deficient = 0;
  int rank_first_min = 2 * c.model.m, rank_first_max = 0;
  double min_lambda_second = std::numeric_limits<double>::infinity();
  double min_lambda_all = std::numeric_limits<double>::infinity();
  double max_abs_det_first = 0.0;
  double min_f1 = std::numeric_limits<double>::infinity();
  for (double h : hs) {
    const AvfConfig acfg(c.model, h, c.solver);
    std::vector<Outcome> out(M);
    parallel_for(M, ctx.threads, [&](std::size_t s) {
      try {
        const PathHierarchy path = PathHierarchy::generate(ctx.seed, s, e.T, e.h_ref, c.model.d);
        out[s].diag = covariance_diagnostics(c.model, path, acfg);
      } catch (const IntegrationFailure&) {
        out[s].ok = false;
      }
    });
    GammaSamples g{h, {}};
    for (std::size_t s = 0; s < M; ++s) {
      if (!out[s].ok) {
        ++failures;
        continue;
      }
      const CovarianceDiagnostics& d = out[s].diag;
      const SpectralSummary sp = spectral_summary(d.terminal);
      rows.push_back({h, static_cast<double>(s), sp.lambda_min, sp.det, 1.0 / sp.det});
      g.gammas.push_back(d.terminal);
      rank_first_min = std::min(rank_first_min, d.rank_first);
      rank_first_max = std::max(rank_first_max, d.rank_first);
      rank_deficient += d.rank_deficient_steps;
      min_lambda_second = std::min(min_lambda_second, d.min_lambda_from_second);
      min_lambda_all = std::min(min_lambda_all, d.min_lambda_all);
      max_abs_det_first = std::max(max_abs_det_first, std::abs(d.det_first));
      min_f1 = std::min(min_f1, d.min_f1_eigenvalue);
    }
    data.push_back(std::move(g));
  }
  if (static_cast<double>(failures) > 0.01 * static_cast<double>(M * hs.size()))
    throw ExperimentAbort(std::to_string(failures) + " covariance runs failed");
  ctx.csv("malliavin.csv", {"h", "sample", "lambda_min", "det_gamma", "inv_det"}, rows);

  json& s = ctx.summary;
  s["failures"] = failures;
  s["rank_first_min"] = rank_first_min;
  s["rank_first_max"] = rank_first_max;
  s["max_abs_det_first"] = max_abs_det_first;
  s["rank_deficient_steps"] = rank_deficient;
  s["min_lambda_from_second"] = min_lambda_second;
  s["min_lambda_all"] = min_lambda_all;
  s["min_f1_eigenvalue"] = min_f1;
  s["rank_ladder_pass"] = rank_first_max == c.model.m && rank_first_min == c.model.m &&
                          rank_deficient == 0 && min_lambda_second > 0.0;
  s["psd_pass"] = min_lambda_all >= -1e-10;
  s["f1_bound_pass"] =
      min_f1 >= -0.5 * c.model.potential.hessian_lower_bound() - 1e-12;

  if (hs.size() >= 2 && M >= 100) {
    const NondegeneracyReport rep = nondegeneracy_report(data);
    std::vector<std::vector<double>> nrows;
    for (const auto& d : rep.per_h)
      nrows.push_back({d.h, static_cast<double>(d.samples), d.lambda_min_min,
                       d.lambda_min_median, d.lambda_min_max, d.mean_inv_lambda,
                       d.mean_inv_lambda_sq, d.max_inv_lambda, d.mean_inv_det,
                       static_cast<double>(d.nonpositive)});
    ctx.csv("nondegeneracy.csv",
            {"h", "samples", "lambda_min_min", "lambda_min_median", "lambda_min_max",
             "mean_inv_lambda", "mean_inv_lambda_sq", "max_inv_lambda", "mean_inv_det",
             "nonpositive"},
            nrows);
    s["inv_det_growth_exponent"] = num(rep.inv_det_growth_exponent);
    s["inv_lambda_growth_exponent"] = num(rep.inv_lambda_growth_exponent);
    s["lambda_growth_within_cubic_pass"] = rep.lambda_growth_within_cubic;
    s["all_positive_pass"] = rep.all_positive;
  }

  // Finite-difference probes at the finest step.
  const double h = hs.back();
  const AvfConfig acfg(c.model, h, c.solver);
  const CounterRng rng(ctx.seed, kFdStream);
  const auto fine = static_cast<std::size_t>(std::llround(e.T / e.h_ref));
  std::vector<std::vector<double>> frows(e.fd_pairs);
  parallel_for(e.fd_pairs, ctx.threads, [&](std::size_t i) {
    const auto sample = static_cast<std::size_t>(rng.uniform(3 * i, 0) * M) % M;
    // Skip the first coarse step: its covariance is still degenerate.
    const std::size_t ratio = std::max<std::size_t>(1, std::llround(h / e.h_ref));
    const std::size_t span = fine - std::min(fine, ratio);
    const auto j =
        std::min(fine - 1, ratio + static_cast<std::size_t>(rng.uniform(3 * i + 1, 0) * span));
    const int k = static_cast<int>(rng.uniform(3 * i + 2, 0) * c.model.d) % c.model.d;
    const PathHierarchy path = PathHierarchy::generate(ctx.seed, sample, e.T, e.h_ref, c.model.d);
    double err = std::numeric_limits<double>::quiet_NaN();
    try {
      err = malliavin_fd_check(c.model, path, acfg, j, k, e.fd_eps).rel_error;
    } catch (const IntegrationFailure&) {
    }
    frows[i] = {static_cast<double>(i), static_cast<double>(sample), static_cast<double>(j),
                static_cast<double>(k), err};
  });
  double fd_max = 0.0;
  bool fd_finite = true;
  for (const auto& r : frows) {
    fd_finite = fd_finite && std::isfinite(r[4]);
    if (std::isfinite(r[4])) fd_max = std::max(fd_max, r[4]);
  }
  ctx.csv("fd_check.csv", {"pair", "sample", "fine_index", "direction", "rel_error"}, frows);
  s["fd_h"] = h;
  s["fd_eps"] = e.fd_eps;
  s["fd_pairs"] = e.fd_pairs;
  s["fd_max_rel_error"] = fd_max;
  s["fd_pass"] = fd_finite && fd_max <= 1e-3;
  ctx.log << "min lambda_min(gamma_n), n >= 2: " << min_lambda_second
          << "; max fd relative error " << fd_max << "\n";
}

void energy_check(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ExperimentSection& e = c.experiment;
  const auto hs = ctx.ladder();
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  std::size_t failures = 0, violations = 0;
  for (double h : hs) {
    std::vector<double> drift(e.samples, std::numeric_limits<double>::quiet_NaN());
    parallel_for(e.samples, ctx.threads, [&](std::size_t s) {
      try {
        const PathHierarchy path = PathHierarchy::generate(ctx.seed, s, e.T, e.h_ref, c.model.d);
        drift[s] = energy_audit(c.model, path, h, c.solver);
      } catch (const IntegrationFailure&) {
      }
    });
    for (std::size_t s = 0; s < e.samples; ++s) {
      rows.push_back({h, static_cast<double>(s), drift[s]});
      if (!std::isfinite(drift[s])) {
        ++failures;
        continue;
      }
      worst = std::max(worst, drift[s]);
      if (drift[s] > 1e-9) ++violations;
    }
  }
  if (static_cast<double>(failures) > 0.01 * static_cast<double>(e.samples * hs.size()))
    throw ExperimentAbort(std::to_string(failures) + " energy audits failed");
  ctx.csv("energy.csv", {"h", "sample", "max_abs_dh"}, rows);
  ctx.summary["failures"] = failures;
  ctx.summary["max_energy_drift"] = worst;
  ctx.summary["energy_tolerance"] = 1e-9;
  ctx.summary["energy_violations"] = violations;
  ctx.summary["energy_pass"] = violations == 0;
  ctx.log << "max |dH| " << worst << "\n";
}

void expmoment_check(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto hs = ctx.ladder();
  const double h = hs.back();
  const double beta =
      c.experiment.beta.value_or(std::max(c.model.noise_energy(), min_admissible_beta(c.model)));
  const MonitorSeries mon = exp_moment_monitor(c.model, h, beta, ctx.settings());
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < mon.times.size(); ++n)
    rows.push_back({mon.times[n], mon.values[n], mon.bound});
  ctx.csv("expmoment.csv", {"t", "estimate", "bound"}, rows);
  const double excluded_fraction =
      static_cast<double>(mon.excluded) / static_cast<double>(std::max<std::size_t>(mon.samples, 1));
  json& s = ctx.summary;
  s["h"] = h;
  s["beta"] = beta;
  s["bound"] = num(mon.bound);
  s["max_estimate"] = num(mon.max_value());
  s["excluded"] = mon.excluded;
  s["excluded_fraction"] = excluded_fraction;
  s["bound_pass"] = mon.max_value() <= 1.5 * mon.bound;
  s["excluded_pass"] = excluded_fraction < 1e-3;
  ctx.log << "max estimate " << mon.max_value() << " vs bound " << mon.bound << "\n";
}

void write_summary(const Context& ctx) {
  if (!ctx.cfg.output.json) return;
  std::ofstream out(ctx.dir / "summary.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write summary.json");
  out << ctx.summary.dump(2) << "\n";
}

}  // namespace

int run(const RunConfig& config, const RunOverrides& overrides, std::ostream& log) {
  const std::optional<ExperimentKind> kind = overrides.kind ? overrides.kind : config.experiment.kind;
  if (!kind) {
    log << "error: no experiment kind (set [experiment] kind or use a subcommand)\n";
    return 1;
  }
  Context ctx{config,
              *kind,
              overrides.seed.value_or(config.experiment.seed),
              resolve_threads(overrides.threads),
              fs::path(overrides.out_dir.value_or(config.output.directory)),
              log,
              json::object()};
  try {
    fs::create_directories(ctx.dir);
  } catch (const fs::filesystem_error& ex) {
    log << "error: " << ex.what() << "\n";
    return 1;
  }
  echo_inputs(ctx);
  try {
    switch (*kind) {
      case ExperimentKind::simulate: simulate(ctx); break;
      case ExperimentKind::converge_strong: converge_strong(ctx); break;
      case ExperimentKind::converge_density: converge_density(ctx); break;
      case ExperimentKind::malliavin_diagnose: malliavin_diagnose(ctx); break;
      case ExperimentKind::energy_check: energy_check(ctx); break;
      case ExperimentKind::expmoment_check: expmoment_check(ctx); break;
    }
  } catch (const std::invalid_argument& ex) {
    log << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::runtime_error& ex) {
    log << "experiment failed: " << ex.what() << "\n";
    ctx.summary["status"] = "failed";
    ctx.summary["error"] = ex.what();
    write_summary(ctx);
    return 2;
  }
  ctx.summary["status"] = "ok";
  write_summary(ctx);
  return 0;
}

}  // namespace avf
