// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "avf/model.hpp"

namespace testing {

inline avf::Potential constant_potential(int m) {
  return avf::Potential::from_polynomial(
      "constant", avf::Polynomial(m, {{0.0, std::vector<int>(m, 0)}}));
}

inline avf::LangevinModel make_model(avf::Potential potential, double v, avf::NoiseMat sigma,
                                     avf::Vec p0, avf::Vec q0) {
  const int m = potential.dimension();
  avf::LangevinModel model{.m = m, .d = static_cast<int>(sigma.cols()), .friction = v,
                           .sigma = std::move(sigma), .potential = std::move(potential),
                           .x0 = {std::move(p0), std::move(q0)}};
  model.validate();
  return model;
}

inline avf::Vec vec(std::initializer_list<double> xs) {
  avf::Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline avf::Vec random_vec(std::mt19937_64& rng, int m, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  avf::Vec y(m);
  do {
    for (int i = 0; i < m; ++i) y[i] = radius * u(rng);
  } while (y.norm() > radius);
  return y;
}

}  // namespace testing
