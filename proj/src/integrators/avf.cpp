// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "avf/integrators.hpp"
#include "integrators/averaging.hpp"

namespace avf {

NewtonDivergence::NewtonDivergence(int iters, double res)
    : IntegrationFailure("Newton solve did not converge after " + std::to_string(iters) +
                         " iterations (residual " + std::to_string(res) + ")"),
      iterations(iters),
      residual(res) {}

Scheme parse_scheme(std::string_view name) {
  if (name == "avf_split") return Scheme::avf_split;
  if (name == "tamed_euler") return Scheme::tamed_euler;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::avf_split ? "avf_split" : "tamed_euler";
}

TamingVariant parse_taming(std::string_view name) {
  if (name == "drift") return TamingVariant::drift;
  if (name == "quadratic") return TamingVariant::quadratic;
  throw std::invalid_argument("unknown taming variant '" + std::string(name) + "'");
}

std::string_view to_string(TamingVariant taming) {
  return taming == TamingVariant::drift ? "drift" : "quadratic";
}

int required_quadrature_nodes(const Potential& potential) {
  if (potential.degree() <= 0) return 8;
  return std::max(1, (potential.degree() + 1) / 2);
}

AvfConfig::AvfConfig(const LangevinModel& model, double h, SolverOptions options)
    : h_(h), options_(options) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step h must be positive");
  if (!(options_.newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (options_.newton_max_iter < 1) throw std::invalid_argument("newton_max_iter must be >= 1");

  const double k = model.potential.hessian_lower_bound();
  if (k > 0.0 && !(h < 2.0 / std::sqrt(k))) {
    std::ostringstream os;
    os << "step h = " << h << " violates the solvability guard h < 2/sqrt(K) = "
       << 2.0 / std::sqrt(k) << " (K = " << k << ")";
    throw SolvabilityError(os.str());
  }

  const int needed = required_quadrature_nodes(model.potential);
  if (options_.quadrature_nodes == 0) {
    options_.quadrature_nodes = needed;
  } else if (options_.quadrature_nodes < needed) {
    throw std::invalid_argument("quadrature_nodes = " + std::to_string(options_.quadrature_nodes) +
                                " is not exact for degree " +
                                std::to_string(model.potential.degree()) + "; need >= " +
                                std::to_string(needed));
  }
  rule_ = QuadratureRule::gauss_legendre(options_.quadrature_nodes);
}

namespace detail {

Mat weighted_averaged_hessian(const Potential& potential, const Vec& a, const Vec& b,
                              const QuadratureRule& rule, bool weight_tau) {
  const Vec delta = b - a;
  Mat out = Mat::Zero(a.size(), a.size());
  for (int i = 0; i < rule.size(); ++i) {
    const double tau = rule.nodes[i];
    const double w = rule.weights[i] * (weight_tau ? tau : 1.0 - tau);
    out.noalias() += w * potential.hessian(a + tau * delta);
  }
  return out;
}

Vec solve_shifted_symmetric(const Mat& s, double c, const Vec& rhs) {
  if (s.rows() == 1) return rhs / (1.0 + c * s(0, 0));
  const Mat j = Mat::Identity(s.rows(), s.cols()) + c * s;
  Eigen::LLT<Mat> llt(j);
  if (llt.info() != Eigen::Success)
    throw IntegrationFailure("I + (h^2/2) F1 is not positive definite");
  return llt.solve(rhs);
}

}  // namespace detail

Vec avf_averaged_gradient(const Potential& potential, const Vec& a, const Vec& b,
                          const QuadratureRule& rule) {
  const Vec delta = b - a;
  Vec out = Vec::Zero(a.size());
  for (int i = 0; i < rule.size(); ++i)
    out.noalias() += rule.weights[i] * potential.gradient(a + rule.nodes[i] * delta);
  return out;
}

SubstepResult avf_hamiltonian_substep(const LangevinModel& model, const State& x,
                                      const AvfConfig& cfg) {
  const double h = cfg.h();
  const double half_h2 = 0.5 * h * h;
  const auto& opts = cfg.options();
  const Potential& pot = model.potential;

  // Newton on Z(z) = z - Q - hP + (h^2/2) avg grad F(Q, z), Jacobian
  // I + (h^2/2) F1(Q, z); free-flight initial guess.
  const Vec free_flight = x.q + h * x.p;
  Vec z = free_flight;
  Vec g = avf_averaged_gradient(pot, x.q, z, cfg.rule());
  Vec residual = z - free_flight + half_h2 * g;
  double res_norm = residual.norm();
  int iters = 0;
  while (!(res_norm <= opts.newton_tol)) {
    if (iters == opts.newton_max_iter || !std::isfinite(res_norm))
      throw NewtonDivergence(iters, res_norm);
    const Mat f1 = detail::weighted_averaged_hessian(pot, x.q, z, cfg.rule(), true);
    z -= detail::solve_shifted_symmetric(f1, half_h2, residual);
    g = avf_averaged_gradient(pot, x.q, z, cfg.rule());
    residual = z - free_flight + half_h2 * g;
    res_norm = residual.norm();
    ++iters;
  }

  SubstepResult out;
  out.x_bar.p = x.p - h * g;
  out.x_bar.q = z;
  out.newton_iters = iters;
  out.residual = res_norm;
  return out;
}

State ou_substep(const LangevinModel& model, const State& x_bar, const OUIncrement& inc,
                 double h) {
  State out;
  out.p = std::exp(-model.friction * h) * x_bar.p + model.sigma * inc.convolved;
  out.q = x_bar.q;
  return out;
}

StepRecord avf_step(const LangevinModel& model, const State& x, const OUIncrement& inc,
                    const AvfConfig& cfg) {
  SubstepResult sub = avf_hamiltonian_substep(model, x, cfg);
  StepRecord rec;
  rec.x = ou_substep(model, sub.x_bar, inc, cfg.h());
  rec.x_bar = std::move(sub.x_bar);
  rec.newton_iters = sub.newton_iters;
  rec.residual = sub.residual;
  return rec;
}

}  // namespace avf
