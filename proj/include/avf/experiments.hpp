// SPDX-License-Identifier: Apache-2.0
//
// Coupled-path Monte Carlo harnesses: strong error of the splitting AVF
// scheme against a fine tamed-Euler reference driven by the same Wiener
// increments, the energy audit of the Hamiltonian substep, and the
// exponential-moment monitor.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "avf/integrators.hpp"

namespace avf {

struct RunSettings {
  double T = 1.0;
  double h_ref = 0x1.0p-12;
  std::size_t samples = 2000;
  std::uint64_t seed = 20240601;
  unsigned threads = 0;  // 0: hardware concurrency
  SolverOptions solver;
  /// Fraction of failed samples above which the experiment aborts.
  double max_failure_fraction = 0.01;
  std::size_t bootstrap_replicates = 200;
  /// Per-step |H(Xbar_{n+1}) - H(X_n)| counted as a violation above this.
  double energy_tolerance = 1e-9;
};

/// Too many samples failed (Newton divergence or non-finite states).
class ExperimentAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorts h_list into strictly decreasing order and checks every entry is a
/// power-of-two multiple of h_ref dividing T. Throws std::invalid_argument.
std::vector<double> checked_step_ladder(std::vector<double> h_list, double h_ref, double T);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// OLS on (ln h, ln err); no CI (ci_low = ci_high = slope).
SlopeFit fit_slope(const std::vector<double>& h_values, const std::vector<double>& errors);

/// OLS on RMS errors built from per-sample squared errors
/// (sq_errors[i][s] for step i, sample s), with a percentile bootstrap CI
/// over samples.
SlopeFit fit_slope(const std::vector<double>& h_values,
                   const std::vector<std::vector<double>>& sq_errors,
                   std::uint64_t seed, std::size_t replicates);

struct ConvergenceResult {
  std::vector<double> h_values;  // strictly decreasing
  std::vector<double> rms_errors;
  std::vector<double> ci_low;    // bootstrap 95% CI of each RMS error
  std::vector<double> ci_high;
  std::size_t sample_count = 0;  // accepted samples
  std::size_t failures = 0;
  double fitted_slope = 0.0;
  double intercept = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  double max_energy_drift = 0.0;
  std::size_t energy_violations = 0;
  std::size_t inversions = 0;
  bool monotone = false;  // at most one inversion, covered by the CIs
};

/// RMS terminal error sqrt(E|X_N^h - X_ref(T)|^2) for each h. The coarse
/// runs use `scheme`; the reference is tamed Euler at settings.h_ref.
ConvergenceResult strong_error(const LangevinModel& model, std::vector<double> h_list,
                               const RunSettings& settings,
                               Scheme scheme = Scheme::avf_split);

/// max_n |H(Xbar_{n+1}) - H(X_n)| along one AVF trajectory.
double energy_audit(const LangevinModel& model, const PathHierarchy& path, double h,
                    const SolverOptions& solver = {});

struct MonitorSeries {
  std::vector<double> times;
  std::vector<double> values;  // Monte Carlo estimate of E[exp(U(X_n) e^{-beta t_n})]
  double bound = 0.0;          // exp(sum |sigma_k|^2 / (2 beta)) e^{U(X_0)}
  std::size_t samples = 0;
  std::size_t excluded = 0;    // overflowing or failed samples
  [[nodiscard]] double max_value() const;
};

/// Smallest admissible beta: max(sum |sigma_k|^2 - 2v, tiny positive floor).
double min_admissible_beta(const LangevinModel& model);

MonitorSeries exp_moment_monitor(const LangevinModel& model, double h, double beta,
                                 const RunSettings& settings);

}  // namespace avf
