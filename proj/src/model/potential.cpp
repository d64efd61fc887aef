// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "avf/model.hpp"
#include "model/internal.hpp"

namespace avf {
namespace {

int grid_points_per_axis(int dim) {
  switch (dim) {
    case 1: return 1001;
    case 2: return 201;
    case 3: return 41;
    default: return 21;
  }
}

template <class Fn>
void for_each_grid_point(int dim, double half_width, Fn&& fn) {
  const int n = grid_points_per_axis(dim);
  const double step = 2.0 * half_width / (n - 1);
  std::vector<int> idx(dim, 0);
  Vec y(dim);
  while (true) {
    for (int i = 0; i < dim; ++i) y[i] = -half_width + step * idx[i];
    fn(y);
    int k = 0;
    while (k < dim && ++idx[k] == n) idx[k++] = 0;
    if (k == dim) break;
  }
}

double smallest_eigenvalue(const Mat& a) {
  if (a.rows() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

namespace detail {

std::string bounded_below_violation(const Polynomial& poly) {
  if (poly.degree() == 0) return {};
  if (poly.degree() % 2 != 0) return "leading total degree is odd";
  for (int i = 0; i < poly.dimension(); ++i) {
    const int top = poly.degree_in(i);
    if (top == 0) continue;
    bool pure_positive = false;
    for (const auto& t : poly.terms()) {
      if (t.coeff == 0.0 || t.exponents[i] != top) continue;
      bool pure = true;
      for (int j = 0; j < poly.dimension(); ++j)
        if (j != i && t.exponents[j] != 0) pure = false;
      if (pure && t.coeff > 0.0) pure_positive = true;
    }
    if (top % 2 != 0 || !pure_positive)
      return "coordinate " + std::to_string(i + 1) +
             " lacks a positive even leading power";
  }
  return {};
}

}  // namespace detail

double grid_min_hessian_eigenvalue(const Potential& potential, double half_width) {
  double lo = std::numeric_limits<double>::infinity();
  for_each_grid_point(potential.dimension(), half_width, [&](const Vec& y) {
    lo = std::min(lo, smallest_eigenvalue(potential.hessian(y)));
  });
  return lo;
}

double grid_min_value(const Potential& potential, double half_width) {
  double lo = std::numeric_limits<double>::infinity();
  for_each_grid_point(potential.dimension(), half_width,
                      [&](const Vec& y) { lo = std::min(lo, potential.value(y)); });
  return lo;
}

Potential Potential::from_polynomial(std::string name, Polynomial poly) {
  Potential p;
  p.name_ = std::move(name);
  p.dim_ = poly.dimension();
  p.degree_ = poly.degree();
  p.exponents_.resize(p.dim_);
  for (int i = 0; i < p.dim_; ++i)
    p.exponents_[i] = std::max(1, poly.degree_in(i) / 2);
  p.poly_ = std::move(poly);

  // K: grid minimum of the smallest Hessian eigenvalue, rounded up to an
  // integer. Values within rounding of zero count as convex.
  const double lam = grid_min_hessian_eigenvalue(p);
  p.hessian_lower_bound_ = lam >= -1e-12 ? 0.0 : std::ceil(-lam);
  p.lower_offset_ = 1.0 + std::max(0.0, -grid_min_value(p));
  return p;
}

Potential Potential::from_callbacks(std::string name, int dim, ValueFn value,
                                    GradientFn gradient, HessianFn hessian,
                                    double hessian_lower_bound,
                                    std::vector<int> exponents, int degree,
                                    double lower_offset) {
  if (dim < 1 || dim > kMaxConfigDim)
    throw std::invalid_argument("potential dimension out of range");
  if (!value || !gradient || !hessian)
    throw std::invalid_argument("callback potential needs value, gradient and hessian");
  if (!(hessian_lower_bound >= 0.0) || !std::isfinite(hessian_lower_bound))
    throw std::invalid_argument("hessian lower bound K must be finite and >= 0");
  if (static_cast<int>(exponents.size()) != dim)
    throw std::invalid_argument("exponent vector length must equal dimension");
  Potential p;
  p.name_ = std::move(name);
  p.dim_ = dim;
  p.value_fn_ = std::move(value);
  p.gradient_fn_ = std::move(gradient);
  p.hessian_fn_ = std::move(hessian);
  p.hessian_lower_bound_ = hessian_lower_bound;
  p.exponents_ = std::move(exponents);
  p.degree_ = degree;
  p.lower_offset_ = lower_offset;
  return p;
}

double Potential::value(const Vec& y) const {
  return poly_ ? poly_->value(y) : value_fn_(y);
}

Vec Potential::gradient(const Vec& y) const {
  return poly_ ? poly_->gradient(y) : gradient_fn_(y);
}

Mat Potential::hessian(const Vec& y) const {
  return poly_ ? poly_->hessian(y) : hessian_fn_(y);
}

Potential Potential::with_lower_offset(double c0) const {
  Potential p = *this;
  p.lower_offset_ = c0;
  return p;
}

Potential Potential::with_hessian_lower_bound(double k) const {
  if (!(k >= 0.0)) throw std::invalid_argument("K must be >= 0");
  Potential p = *this;
  p.hessian_lower_bound_ = k;
  return p;
}

Potential builtin_potential(std::string_view name, int dim) {
  if (name == "quartic1d") {
    return Potential::from_polynomial("quartic1d", Polynomial(1, {{1.0, {4}}}));
  }
  if (name == "coupled2d") {
    return Potential::from_polynomial(
        "coupled2d",
        Polynomial(2, {{1.0, {8, 0}}, {1.0, {0, 2}}, {2.0, {1, 1}}}));
  }
  if (name == "harmonic") {
    std::vector<Monomial> terms;
    for (int i = 0; i < dim; ++i) {
      std::vector<int> e(dim, 0);
      e[i] = 2;
      terms.push_back({0.5, std::move(e)});
    }
    return Potential::from_polynomial("harmonic", Polynomial(dim, std::move(terms)));
  }
  throw std::invalid_argument("unknown potential '" + std::string(name) + "'");
}

Potential custom_potential(int dim, std::vector<Monomial> terms) {
  Polynomial poly(dim, std::move(terms));
  if (auto why = detail::bounded_below_violation(poly); !why.empty())
    throw std::invalid_argument("custom polynomial is not bounded below: " + why);
  return Potential::from_polynomial("custom", std::move(poly));
}

}  // namespace avf
