// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "avf/model.hpp"
#include "model/internal.hpp"

namespace avf {

PhaseVec State::stacked() const {
  PhaseVec x(p.size() + q.size());
  x << p, q;
  return x;
}

void LangevinModel::validate() const {
  if (m < 1 || m > kMaxConfigDim)
    throw std::invalid_argument("m must be in [1, " + std::to_string(kMaxConfigDim) + "]");
  if (d < 1 || d > kMaxNoiseDim)
    throw std::invalid_argument("d must be in [1, " + std::to_string(kMaxNoiseDim) + "]");
  if (!(friction > 0.0) || !std::isfinite(friction))
    throw std::invalid_argument("friction v must be positive");
  if (sigma.rows() != m || sigma.cols() != d)
    throw std::invalid_argument("sigma must be an m x d matrix");
  if (!sigma.allFinite()) throw std::invalid_argument("sigma has non-finite entries");
  if (potential.dimension() != m)
    throw std::invalid_argument("potential dimension does not match m");
  if (x0.p.size() != m || x0.q.size() != m)
    throw std::invalid_argument("initial state must have p and q of length m");
  if (!x0.finite()) throw std::invalid_argument("initial state has non-finite entries");
}

double hamiltonian(const Potential& potential, const State& x) {
  return 0.5 * x.p.squaredNorm() + potential.value(x.q) + potential.lower_offset();
}

double hamiltonian(const LangevinModel& model, const State& x) {
  return hamiltonian(model.potential, x);
}

int noise_rank(const LangevinModel& model) {
  const Mat cov = model.sigma * model.sigma.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  int rank = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-12 * scale) ++rank;
  return rank;
}

bool AssumptionReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const AssumptionCheck* AssumptionReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

AssumptionReport validate_assumptions(const LangevinModel& model) {
  AssumptionReport report;

  {
    const int rank = noise_rank(model);
    std::ostringstream os;
    os << "rank(sigma sigma^T) = " << rank << ", m = " << model.m;
    report.checks.push_back({"noise_rank", rank == model.m, os.str()});
  }
  {
    const double k = model.potential.hessian_lower_bound();
    std::ostringstream os;
    os << "K = " << k;
    report.checks.push_back({"hessian_lower_bound", std::isfinite(k) && k >= 0.0, os.str()});
  }
  if (const Polynomial* poly = model.potential.polynomial()) {
    const std::string why = detail::bounded_below_violation(*poly);
    report.checks.push_back(
        {"bounded_below", why.empty(), why.empty() ? "leading powers even and positive" : why});
  } else {
    const double lo = grid_min_value(model.potential);
    report.checks.push_back({"bounded_below", std::isfinite(lo),
                             "callback potential: grid minimum " + std::to_string(lo)});
  }
  {
    bool ok = static_cast<int>(model.potential.exponents().size()) == model.m;
    std::ostringstream os;
    os << "l = (";
    for (std::size_t i = 0; i < model.potential.exponents().size(); ++i) {
      const int l = model.potential.exponents()[i];
      ok = ok && l >= 1;
      os << (i ? ", " : "") << l;
    }
    os << ")";
    report.checks.push_back({"growth_exponents", ok, os.str()});
  }
  return report;
}

LangevinModel example1_model() {
  LangevinModel model{.m = 1, .d = 1, .friction = 1.0, .sigma = NoiseMat::Ones(1, 1),
                      .potential = builtin_potential("quartic1d"), .x0 = {}};
  model.x0.p = Vec::Ones(1);
  model.x0.q = Vec::Ones(1);
  return model;
}

LangevinModel example2_model() {
  LangevinModel model{.m = 2, .d = 2, .friction = 1.0, .sigma = NoiseMat::Ones(2, 2),
                      .potential = builtin_potential("coupled2d"), .x0 = {}};
  model.x0.p = Vec::Ones(2);
  model.x0.q = Vec::Ones(2);
  return model;
}

}  // namespace avf
