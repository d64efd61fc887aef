// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "avf/model.hpp"

namespace avf {
namespace {

using PowerTable =
    std::array<std::array<double, Polynomial::kMaxExponent + 1>, kMaxConfigDim>;

void fill_powers(const Vec& y, const std::vector<int>& max_exp, PowerTable& pw) {
  for (int i = 0; i < y.size(); ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= max_exp[i]; ++k) pw[i][k] = pw[i][k - 1] * y[i];
  }
}

std::vector<int> max_exponents(int dim, const std::vector<Monomial>& terms) {
  std::vector<int> out(dim, 0);
  for (const auto& t : terms)
    for (int i = 0; i < dim; ++i) out[i] = std::max(out[i], t.exponents[i]);
  return out;
}

}  // namespace

Polynomial::Polynomial(int dim, std::vector<Monomial> terms)
    : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1 || dim > kMaxConfigDim)
    throw std::invalid_argument("polynomial dimension must be in [1, " +
                                std::to_string(kMaxConfigDim) + "]");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exponents.size()) != dim)
      throw std::invalid_argument("monomial exponent count does not match dimension");
    int deg = 0;
    for (int e : t.exponents) {
      if (e < 0 || e > kMaxExponent)
        throw std::invalid_argument("monomial exponent out of range");
      deg += e;
    }
    if (t.coeff != 0.0) degree_ = std::max(degree_, deg);
  }
}

int Polynomial::degree_in(int i) const {
  int out = 0;
  for (const auto& t : terms_)
    if (t.coeff != 0.0) out = std::max(out, t.exponents[i]);
  return out;
}

double Polynomial::value(const Vec& y) const {
  PowerTable pw;
  fill_powers(y, max_exponents(dim_, terms_), pw);
  double sum = 0.0;
  for (const auto& t : terms_) {
    double term = t.coeff;
    for (int i = 0; i < dim_; ++i) term *= pw[i][t.exponents[i]];
    sum += term;
  }
  return sum;
}

Vec Polynomial::gradient(const Vec& y) const {
  PowerTable pw;
  fill_powers(y, max_exponents(dim_, terms_), pw);
  Vec g = Vec::Zero(dim_);
  for (const auto& t : terms_) {
    for (int i = 0; i < dim_; ++i) {
      const int ei = t.exponents[i];
      if (ei == 0) continue;
      double term = t.coeff * ei * pw[i][ei - 1];
      for (int j = 0; j < dim_; ++j)
        if (j != i) term *= pw[j][t.exponents[j]];
      g[i] += term;
    }
  }
  return g;
}

Mat Polynomial::hessian(const Vec& y) const {
  PowerTable pw;
  fill_powers(y, max_exponents(dim_, terms_), pw);
  Mat hess = Mat::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    for (int i = 0; i < dim_; ++i) {
      for (int j = i; j < dim_; ++j) {
        std::array<int, kMaxConfigDim> e{};
        std::copy(t.exponents.begin(), t.exponents.end(), e.begin());
        double factor = t.coeff;
        factor *= e[i];
        if (factor == 0.0) continue;
        --e[i];
        factor *= e[j];
        if (factor == 0.0) continue;
        --e[j];
        for (int k = 0; k < dim_; ++k) factor *= pw[k][e[k]];
        hess(i, j) += factor;
      }
    }
  }
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < i; ++j) hess(i, j) = hess(j, i);
  return hess;
}

}  // namespace avf
