// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used only by the tests. Each one reaches the same
// quantity as the library by a different route.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "avf/model.hpp"

namespace oracle {

// Nested Horner evaluation, one variable at a time.
inline double horner(const std::vector<avf::Monomial>& terms, const std::vector<double>& y,
                     std::size_t var = 0) {
  if (terms.empty()) return 0.0;
  if (var == y.size()) {
    double s = 0.0;
    for (const auto& t : terms) s += t.coeff;
    return s;
  }
  std::map<int, std::vector<avf::Monomial>> by_power;
  for (const auto& t : terms) by_power[t.exponents[var]].push_back(t);
  const int top = by_power.rbegin()->first;
  double acc = 0.0;
  for (int k = top; k >= 0; --k) {
    acc *= y[var];
    if (auto it = by_power.find(k); it != by_power.end()) acc += horner(it->second, y, var + 1);
  }
  return acc;
}

// Coefficients of (a + tau d)^e in tau.
inline std::vector<double> binomial_line(double a, double d, int e) {
  std::vector<double> c(e + 1, 0.0);
  double binom = 1.0;
  for (int k = 0; k <= e; ++k) {
    c[k] = binom * std::pow(a, e - k) * std::pow(d, k);
    binom = binom * (e - k) / (k + 1);
  }
  return c;
}

inline std::vector<double> poly_mul(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> out(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  return out;
}

// Exact int_0^1 d^2F/dy_i dy_j (a + tau (b - a)) w(tau) dtau for a polynomial F,
// where w is given by its coefficients in tau (e.g. {0, 1} for tau).
inline avf::Mat exact_weighted_hessian(const std::vector<avf::Monomial>& terms, int m,
                                       const avf::Vec& a, const avf::Vec& b,
                                       const std::vector<double>& weight) {
  avf::Mat out = avf::Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double total = 0.0;
      for (const auto& t : terms) {
        std::vector<int> e = t.exponents;
        double c = t.coeff;
        c *= e[i];
        if (e[i] == 0) continue;
        --e[i];
        c *= e[j];
        if (e[j] == 0) continue;
        --e[j];
        std::vector<double> poly{c};
        for (int k = 0; k < m; ++k) poly = poly_mul(poly, binomial_line(a[k], b[k] - a[k], e[k]));
        poly = poly_mul(poly, weight);
        for (std::size_t k = 0; k < poly.size(); ++k) total += poly[k] / static_cast<double>(k + 1);
      }
      out(i, j) = total;
    }
  }
  return out;
}

inline avf::Vec central_gradient(const std::function<double(const avf::Vec&)>& f, avf::Vec y,
                                 double step) {
  avf::Vec g(y.size());
  for (int i = 0; i < y.size(); ++i) {
    const double y0 = y[i];
    y[i] = y0 + step;
    const double up = f(y);
    y[i] = y0 - step;
    const double down = f(y);
    y[i] = y0;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace oracle
