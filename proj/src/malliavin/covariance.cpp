// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <Eigen/Cholesky>

#include "avf/malliavin.hpp"
#include "integrators/averaging.hpp"

namespace avf {

AveragedHessians averaged_hessians(const Potential& potential, const Vec& q_n,
                                   const Vec& q_np1, const QuadratureRule& rule) {
  return {detail::weighted_averaged_hessian(potential, q_n, q_np1, rule, true),
          detail::weighted_averaged_hessian(potential, q_n, q_np1, rule, false)};
}

PhaseMat propagator_matrix(const LangevinModel& model, const AveragedHessians& hess,
                           double h) {
  const int m = static_cast<int>(hess.f1.rows());
  const double decay = std::exp(-model.friction * h);
  const double half_h2 = 0.5 * h * h;
  const Mat id = Mat::Identity(m, m);

  // M = (I + (h^2/2) F1)^{-1}; SPD under the step guard.
  const Mat shifted = id + half_h2 * hess.f1;
  Eigen::LLT<Mat> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw IntegrationFailure("I + (h^2/2) F1 is not positive definite");
  const Mat inv = llt.solve(id);

  // A_n = [[I, -h e F1 M], [0, M]] * [[e I, -h e F2], [h I, I - (h^2/2) F2]]
  PhaseMat left = PhaseMat::Zero(2 * m, 2 * m);
  left.topLeftCorner(m, m) = id;
  left.topRightCorner(m, m) = -h * decay * hess.f1 * inv;
  left.bottomRightCorner(m, m) = inv;

  PhaseMat right(2 * m, 2 * m);
  right.topLeftCorner(m, m) = decay * id;
  right.topRightCorner(m, m) = -h * decay * hess.f2;
  right.bottomLeftCorner(m, m) = h * id;
  right.bottomRightCorner(m, m) = id - half_h2 * hess.f2;
  return left * right;
}

PhaseMat noise_injection(const LangevinModel& model, double h) {
  const int m = model.m;
  PhaseMat out = PhaseMat::Zero(2 * m, 2 * m);
  out.topLeftCorner(m, m) =
      ou_variance_factor(model.friction, h) * model.sigma * model.sigma.transpose();
  return out;
}

MalliavinState MalliavinState::initial(int m) {
  return {PhaseMat::Zero(2 * m, 2 * m), 0};
}

MalliavinState gamma_step(const LangevinModel& model, const MalliavinState& mal,
                          const AveragedHessians& hess, double h) {
  const PhaseMat a = propagator_matrix(model, hess, h);
  PhaseMat next = a * mal.gamma * a.transpose() + noise_injection(model, h);
  MalliavinState out;
  out.gamma = 0.5 * (next + next.transpose());
  out.step = mal.step + 1;
  return out;
}

std::vector<PhaseMat> propagate_covariance(const LangevinModel& model,
                                           const Trajectory& traj, const AvfConfig& cfg) {
  std::vector<PhaseMat> out;
  out.reserve(traj.size());
  MalliavinState mal = MalliavinState::initial(model.m);
  out.push_back(mal.gamma);
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    const auto hess = averaged_hessians(model.potential, traj[n].q, traj[n + 1].q, cfg.rule());
    mal = gamma_step(model, mal, hess, cfg.h());
    out.push_back(mal.gamma);
  }
  return out;
}

FdCheckResult malliavin_fd_check(const LangevinModel& model, const PathHierarchy& path,
                                 const AvfConfig& cfg, std::size_t fine_index,
                                 int direction, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("bump eps must be positive");
  if (fine_index >= path.fine_steps() || direction < 0 || direction >= model.d)
    throw std::out_of_range("fd check index out of range");

  const double h = cfg.h();
  const std::size_t ratio = path.ratio_for(h);
  const std::size_t seed_step = fine_index / ratio;  // step n* containing r
  const std::size_t local = fine_index % ratio;
  const int m = model.m;

  const Trajectory base = integrate(model, Scheme::avf_split, path, cfg);

  // D_r X_{n*+1} = (exp(-v (t_{n*+1} - s_{j+1})) sigma_k, 0), with the same
  // right-endpoint weight the discrete convolution applies to increment j.
  const double weight =
      std::exp(-model.friction * path.h_ref() * static_cast<double>(ratio - 1 - local));
  PhaseVec deriv = PhaseVec::Zero(2 * m);
  deriv.head(m) = weight * model.sigma.col(direction);
  for (std::size_t n = seed_step + 1; n + 1 < base.size(); ++n) {
    const auto hess = averaged_hessians(model.potential, base[n].q, base[n + 1].q, cfg.rule());
    deriv = propagator_matrix(model, hess, h) * deriv;
  }

  PathHierarchy up = path;
  PathHierarchy down = path;
  up.bump(fine_index, direction, eps);
  down.bump(fine_index, direction, -eps);
  const PhaseVec plus = integrate_terminal(model, Scheme::avf_split, up, cfg).stacked();
  const PhaseVec minus = integrate_terminal(model, Scheme::avf_split, down, cfg).stacked();

  FdCheckResult out;
  out.propagated = deriv;
  out.finite_difference = (plus - minus) / (2.0 * eps);
  const double scale = deriv.cwiseAbs().maxCoeff();
  out.rel_error = (out.finite_difference - deriv).cwiseAbs().maxCoeff() /
                  (scale > 0.0 ? scale : 1.0);
  return out;
}

}  // namespace avf
