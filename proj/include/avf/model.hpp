// SPDX-License-Identifier: Apache-2.0
//
// Potentials and the stochastic Langevin system
//
//   dP = -grad F(Q) dt - v P dt + sigma dW,   dQ = P dt,
//
// together with checks of the structural assumptions the splitting scheme
// relies on (polynomial growth, Hessian bounded below, noise rank).
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avf/linalg.hpp"

namespace avf {

struct Monomial {
  double coeff = 0.0;
  std::vector<int> exponents;
};

/// Sparse multivariate polynomial sum_k c_k prod_i y_i^{e_ki}.
class Polynomial {
 public:
  static constexpr int kMaxExponent = 32;

  Polynomial(int dim, std::vector<Monomial> terms);

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const std::vector<Monomial>& terms() const { return terms_; }
  /// Highest power of y_i appearing in any term.
  [[nodiscard]] int degree_in(int i) const;

  [[nodiscard]] double value(const Vec& y) const;
  [[nodiscard]] Vec gradient(const Vec& y) const;
  [[nodiscard]] Mat hessian(const Vec& y) const;

 private:
  int dim_;
  int degree_ = 0;
  std::vector<Monomial> terms_;
};

class Potential {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  using HessianFn = std::function<Mat(const Vec&)>;

  /// Builds a polynomial potential. The Hessian lower bound K, the growth
  /// exponents l and the default offset C0 are derived from the coefficients.
  static Potential from_polynomial(std::string name, Polynomial poly);

  /// Callback potential. `degree` is 0 when unknown (no exact quadrature).
  static Potential from_callbacks(std::string name, int dim, ValueFn value,
                                  GradientFn gradient, HessianFn hessian,
                                  double hessian_lower_bound,
                                  std::vector<int> exponents, int degree = 0,
                                  double lower_offset = 1.0);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] double value(const Vec& y) const;
  [[nodiscard]] Vec gradient(const Vec& y) const;
  [[nodiscard]] Mat hessian(const Vec& y) const;

  /// K >= 0 with lambda_min(hessian(y)) >= -K for all y.
  [[nodiscard]] double hessian_lower_bound() const { return hessian_lower_bound_; }
  [[nodiscard]] std::span<const int> exponents() const { return exponents_; }
  /// Total polynomial degree; 0 for callback potentials.
  [[nodiscard]] int degree() const { return degree_; }
  /// C0 such that F(y) + C0 > 0.
  [[nodiscard]] double lower_offset() const { return lower_offset_; }
  [[nodiscard]] const Polynomial* polynomial() const {
    return poly_ ? &*poly_ : nullptr;
  }

  [[nodiscard]] Potential with_lower_offset(double c0) const;
  [[nodiscard]] Potential with_hessian_lower_bound(double k) const;

  /// Placeholder with dimension 0; evaluating it throws.
  Potential() = default;

 private:

  std::string name_;
  int dim_ = 0;
  std::optional<Polynomial> poly_;
  ValueFn value_fn_;
  GradientFn gradient_fn_;
  HessianFn hessian_fn_;
  double hessian_lower_bound_ = 0.0;
  std::vector<int> exponents_;
  int degree_ = 0;
  double lower_offset_ = 1.0;
};

/// `quartic1d` (F = Q^4), `coupled2d` (F = Q1^8 + Q2^2 + 2 Q1 Q2) or
/// `harmonic` (F = |y|^2 / 2 in `dim` dimensions).
Potential builtin_potential(std::string_view name, int dim = 1);

/// Throws std::invalid_argument if the polynomial is not bounded below
/// (odd leading degree, or a coordinate without a positive even leading power).
Potential custom_potential(int dim, std::vector<Monomial> terms);

/// Smallest Hessian eigenvalue over a uniform grid on [-half_width, half_width]^m.
double grid_min_hessian_eigenvalue(const Potential& potential,
                                   double half_width = 5.0);
double grid_min_value(const Potential& potential, double half_width = 5.0);

struct State {
  Vec p;
  Vec q;

  [[nodiscard]] bool finite() const { return p.allFinite() && q.allFinite(); }
  [[nodiscard]] PhaseVec stacked() const;
};

struct LangevinModel {
  int m = 1;
  int d = 1;
  double friction = 1.0;
  NoiseMat sigma;
  Potential potential;
  State x0;

  /// Checks dimensions and v > 0; throws std::invalid_argument.
  void validate() const;
  /// sum_k |sigma_k|^2 (squared Frobenius norm).
  [[nodiscard]] double noise_energy() const { return sigma.squaredNorm(); }
};

/// U(x) = |p|^2/2 + F(q) + C0.
double hamiltonian(const LangevinModel& model, const State& x);
double hamiltonian(const Potential& potential, const State& x);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] const AssumptionCheck* find(std::string_view name) const;
};

AssumptionReport validate_assumptions(const LangevinModel& model);

/// Numerical rank of sigma sigma^T.
int noise_rank(const LangevinModel& model);

/// quartic1d, v = 1, sigma = 1, (P0, Q0) = (1, 1).
LangevinModel example1_model();
/// coupled2d, v = 1, sigma_ij = 1, P0 = Q0 = (1, 1).
LangevinModel example2_model();

}  // namespace avf
