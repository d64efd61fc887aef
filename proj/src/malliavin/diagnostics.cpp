// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "avf/malliavin.hpp"
#include "avf/stats.hpp"

namespace avf {

SpectralSummary spectral_summary(const PhaseMat& gamma) {
  Eigen::SelfAdjointEigenSolver<PhaseMat> es(gamma, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  SpectralSummary s;
  s.lambda_min = ev[0];
  s.lambda_max = ev[ev.size() - 1];
  s.det = 1.0;
  const double scale = ev.cwiseAbs().maxCoeff();
  for (int i = 0; i < ev.size(); ++i) {
    s.det *= ev[i];
    if (ev[i] > 1e-12 * scale) ++s.rank;
  }
  return s;
}

NondegeneracyReport nondegeneracy_report(const std::vector<GammaSamples>& data,
                                         std::size_t min_samples) {
  if (data.size() < 2) throw std::invalid_argument("nondegeneracy report needs >= 2 step sizes");
  NondegeneracyReport report;
  report.all_positive = true;
  std::vector<double> inv_h, inv_det, max_inv_lambda;
  for (const auto& group : data) {
    if (group.gammas.size() < min_samples)
      throw std::invalid_argument("nondegeneracy report needs >= " +
                                  std::to_string(min_samples) + " samples per step size");
    StepSizeDiagnostics diag;
    diag.h = group.h;
    diag.samples = group.gammas.size();
    std::vector<double> lam, inv1, inv2, invdet;
    lam.reserve(diag.samples);
    for (const auto& g : group.gammas) {
      const SpectralSummary s = spectral_summary(g);
      lam.push_back(s.lambda_min);
      if (s.lambda_min <= 0.0) {
        ++diag.nonpositive;
        continue;
      }
      inv1.push_back(1.0 / s.lambda_min);
      inv2.push_back(1.0 / (s.lambda_min * s.lambda_min));
      invdet.push_back(1.0 / s.det);
    }
    diag.lambda_min_min = *std::min_element(lam.begin(), lam.end());
    diag.lambda_min_max = *std::max_element(lam.begin(), lam.end());
    diag.lambda_min_median = quantile(lam, 0.5);
    if (!inv1.empty()) {
      const double count = static_cast<double>(inv1.size());
      diag.mean_inv_lambda = pairwise_sum(inv1) / count;
      diag.mean_inv_lambda_sq = pairwise_sum(inv2) / count;
      diag.mean_inv_det = pairwise_sum(invdet) / count;
      diag.max_inv_lambda = *std::max_element(inv1.begin(), inv1.end());
    }
    if (diag.nonpositive > 0) report.all_positive = false;
    inv_h.push_back(1.0 / group.h);
    inv_det.push_back(diag.mean_inv_det);
    max_inv_lambda.push_back(diag.max_inv_lambda);
    report.per_h.push_back(diag);
  }
  if (report.all_positive) {
    report.inv_det_growth_exponent = fit_loglog(inv_h, inv_det).slope;
    report.inv_lambda_growth_exponent = fit_loglog(inv_h, max_inv_lambda).slope;
    report.lambda_growth_within_cubic = report.inv_lambda_growth_exponent <= 3.0;
  }
  return report;
}

namespace {

double smallest_eigenvalue(const Mat& a) {
  if (a.rows() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

CovarianceDiagnostics covariance_diagnostics(const LangevinModel& model,
                                             const PathHierarchy& path, const AvfConfig& cfg) {
  const Trajectory traj = integrate(model, Scheme::avf_split, path, cfg);
  CovarianceDiagnostics diag;
  diag.min_lambda_from_second = std::numeric_limits<double>::infinity();
  diag.min_lambda_all = std::numeric_limits<double>::infinity();
  diag.min_f1_eigenvalue = std::numeric_limits<double>::infinity();
  diag.min_f2_eigenvalue = std::numeric_limits<double>::infinity();

  MalliavinState mal = MalliavinState::initial(model.m);
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    const auto hess = averaged_hessians(model.potential, traj[n].q, traj[n + 1].q, cfg.rule());
    diag.min_f1_eigenvalue = std::min(diag.min_f1_eigenvalue, smallest_eigenvalue(hess.f1));
    diag.min_f2_eigenvalue = std::min(diag.min_f2_eigenvalue, smallest_eigenvalue(hess.f2));
    mal = gamma_step(model, mal, hess, cfg.h());
    const SpectralSummary s = spectral_summary(mal.gamma);
    diag.min_lambda_all = std::min(diag.min_lambda_all, s.lambda_min);
    if (mal.step == 1) {
      diag.rank_first = s.rank;
      diag.det_first = s.det;
      diag.lambda_max_first = s.lambda_max;
    } else {
      diag.min_lambda_from_second = std::min(diag.min_lambda_from_second, s.lambda_min);
      if (s.rank < 2 * model.m) ++diag.rank_deficient_steps;
    }
  }
  diag.terminal = mal.gamma;
  return diag;
}

}  // namespace avf
