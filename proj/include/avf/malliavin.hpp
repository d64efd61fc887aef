// SPDX-License-Identifier: Apache-2.0
//
// Malliavin covariance propagation through the splitting AVF scheme.
//
// Differentiating one step with respect to the driving noise gives
// D X_{n+1} = A_n D X_n, where A_n depends on the averaged Hessians
// F1 = int hess F tau dtau and F2 = int hess F (1 - tau) dtau taken along
// the segment [Q_n, Q_{n+1}]. The covariance obeys
//
//   gamma_{n+1} = A_n gamma_n A_n^T + nu_h blockdiag(sigma sigma^T, 0),
//
// with nu_h = (1 - exp(-2 v h)) / (2 v).
#pragma once

#include <cstddef>
#include <vector>

#include "avf/integrators.hpp"

namespace avf {

struct AveragedHessians {
  Mat f1;
  Mat f2;
};

AveragedHessians averaged_hessians(const Potential& potential, const Vec& q_n,
                                   const Vec& q_np1, const QuadratureRule& rule);

/// Step Jacobian A_n of the splitting map with respect to (P_n, Q_n).
PhaseMat propagator_matrix(const LangevinModel& model, const AveragedHessians& hess,
                           double h);

/// nu_h * blockdiag(sigma sigma^T, 0).
PhaseMat noise_injection(const LangevinModel& model, double h);

struct MalliavinState {
  PhaseMat gamma;
  std::size_t step = 0;

  static MalliavinState initial(int m);  // deterministic datum: gamma_0 = 0
};

/// One covariance update, symmetrized afterwards.
MalliavinState gamma_step(const LangevinModel& model, const MalliavinState& mal,
                          const AveragedHessians& hess, double h);

/// gamma_0 ... gamma_N along an AVF trajectory.
std::vector<PhaseMat> propagate_covariance(const LangevinModel& model,
                                           const Trajectory& traj, const AvfConfig& cfg);

struct SpectralSummary {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double det = 0.0;  // product of eigenvalues
  int rank = 0;      // eigenvalues above 1e-12 * max(|lambda|)
};

SpectralSummary spectral_summary(const PhaseMat& gamma);

/// Per-trajectory covariance structure: rank ladder, positivity and the
/// averaged-Hessian lower bounds along the steps actually taken.
struct CovarianceDiagnostics {
  PhaseMat terminal;                  // gamma_N
  int rank_first = 0;                 // rank of gamma_1
  double det_first = 0.0;
  double lambda_max_first = 0.0;
  double min_lambda_from_second = 0.0;  // min over n >= 2 of lambda_min(gamma_n)
  std::size_t rank_deficient_steps = 0;  // n >= 2 with rank(gamma_n) < 2m
  double min_lambda_all = 0.0;           // min over n >= 1 (PSD check)
  double min_f1_eigenvalue = 0.0;
  double min_f2_eigenvalue = 0.0;
};

CovarianceDiagnostics covariance_diagnostics(const LangevinModel& model,
                                             const PathHierarchy& path, const AvfConfig& cfg);

struct StepSizeDiagnostics {
  double h = 0.0;
  std::size_t samples = 0;
  double lambda_min_min = 0.0;
  double lambda_min_median = 0.0;
  double lambda_min_max = 0.0;
  double mean_inv_lambda = 0.0;     // E[lambda_min^-1]
  double mean_inv_lambda_sq = 0.0;  // E[lambda_min^-2]
  double max_inv_lambda = 0.0;
  double mean_inv_det = 0.0;        // E[det(gamma)^-1]
  std::size_t nonpositive = 0;      // samples with lambda_min <= 0
};

struct NondegeneracyReport {
  std::vector<StepSizeDiagnostics> per_h;  // ordered as given
  /// Least-squares exponent of E[det^-1] against 1/h.
  double inv_det_growth_exponent = 0.0;
  /// Least-squares exponent of max lambda_min^-1 against 1/h.
  double inv_lambda_growth_exponent = 0.0;
  /// max lambda_min^-1 grows no faster than h^-3.
  bool lambda_growth_within_cubic = false;
  bool all_positive = false;
};

struct GammaSamples {
  double h = 0.0;
  std::vector<PhaseMat> gammas;  // terminal covariance per sample
};

/// Requires >= 2 step sizes with >= 100 samples each (std::invalid_argument).
NondegeneracyReport nondegeneracy_report(const std::vector<GammaSamples>& data,
                                         std::size_t min_samples = 100);

struct FdCheckResult {
  PhaseVec propagated;  // A_{N-1} ... A_{n*+1} D_{n*+1}
  PhaseVec finite_difference;
  double rel_error = 0.0;  // |fd - propagated|_inf / |propagated|_inf
};

/// Compares the propagated first variation of X_N with respect to fine
/// increment `fine_index` in noise direction `direction` against a central
/// difference of two bumped integrations. Throws NewtonDivergence.
FdCheckResult malliavin_fd_check(const LangevinModel& model, const PathHierarchy& path,
                                 const AvfConfig& cfg, std::size_t fine_index,
                                 int direction, double eps);

}  // namespace avf
