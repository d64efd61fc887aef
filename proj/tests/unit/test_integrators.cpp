// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "avf/experiments.hpp"
#include "avf/integrators.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace avf;
using testing::vec;

namespace {

OUIncrement zero_increment(int d) { return {NoiseVec::Zero(d), NoiseVec::Zero(d)}; }

LangevinModel harmonic_model(double v, double sigma) {
  return testing::make_model(builtin_potential("harmonic"), v, NoiseMat::Constant(1, 1, sigma),
                             vec({1.0}), vec({0.0}));
}

}  // namespace

TEST_CASE("gauss-legendre rules integrate monomials exactly") {
  for (int n = 1; n <= 10; ++n) {
    const auto rule = QuadratureRule::gauss_legendre(n);
    REQUIRE(rule.size() == n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("quadrature node counts") {
  CHECK(required_quadrature_nodes(builtin_potential("quartic1d")) == 2);
  CHECK(required_quadrature_nodes(builtin_potential("coupled2d")) == 4);
  const LangevinModel ex1 = example1_model();
  CHECK(AvfConfig(ex1, 0.1).rule().size() == 2);
  SolverOptions opts;
  opts.quadrature_nodes = 1;
  CHECK_THROWS_AS(AvfConfig(ex1, 0.1, opts), std::invalid_argument);
}

TEST_CASE("averaged gradient") {
  const Potential f = builtin_potential("quartic1d");
  const auto rule = QuadratureRule::gauss_legendre(2);
  CHECK(avf_averaged_gradient(f, vec({1.0}), vec({1.0}), rule)[0] ==
        doctest::Approx(4.0).epsilon(1e-15));
  CHECK(avf_averaged_gradient(f, vec({0.0}), vec({2.0}), rule)[0] ==
        doctest::Approx(8.0).epsilon(1e-15));
  CHECK(std::abs(avf_averaged_gradient(f, vec({-1.0}), vec({1.0}), rule)[0]) <= 1e-15);
}

TEST_CASE("solvability guard") {
  LangevinModel ex2 = example2_model();
  ex2.sigma = NoiseMat::Identity(2, 2);
  CHECK_NOTHROW(AvfConfig(ex2, 1.0));
  CHECK_THROWS_AS(AvfConfig(ex2, std::sqrt(2.0)), SolvabilityError);
  CHECK_THROWS_AS(AvfConfig(ex2, 10.0), SolvabilityError);
  CHECK_THROWS_AS(AvfConfig(ex2, 0.0), std::invalid_argument);
}

TEST_CASE("hamiltonian substep") {
  SUBCASE("constant potential is free flight") {
    const LangevinModel model = testing::make_model(testing::constant_potential(2), 1.0,
                                                    NoiseMat::Identity(2, 2), vec({0.5, -2.0}),
                                                    vec({1.0, 3.0}));
    const auto out = avf_hamiltonian_substep(model, model.x0, AvfConfig(model, 0.25));
    CHECK(out.x_bar.p == model.x0.p);
    CHECK(out.x_bar.q == model.x0.q + 0.25 * model.x0.p);
  }
  SUBCASE("harmonic closed form") {
    const LangevinModel model = harmonic_model(1.0, 1.0);
    const State x{vec({1.0}), vec({0.0})};
    const auto out = avf_hamiltonian_substep(model, x, AvfConfig(model, 1.0));
    CHECK(out.x_bar.q[0] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(out.x_bar.p[0] == doctest::Approx(0.6).epsilon(1e-14));
    const Potential f0 = model.potential.with_lower_offset(0.0);
    CHECK(hamiltonian(f0, out.x_bar) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("quartic energy is preserved") {
    const LangevinModel model = example1_model();
    const auto out = avf_hamiltonian_substep(model, model.x0, AvfConfig(model, 0x1.0p-6));
    CHECK(std::abs(hamiltonian(model, out.x_bar) - hamiltonian(model, model.x0)) <= 1e-10);
  }
}

TEST_CASE("energy identity on random states") {
  std::mt19937_64 rng(8);
  LangevinModel ex2 = example2_model();
  ex2.sigma = NoiseMat::Identity(2, 2);
  for (const LangevinModel& model : {example1_model(), ex2}) {
    for (double h : {0x1.0p-3, 0x1.0p-6, 0x1.0p-9}) {
      const AvfConfig cfg(model, h);
      for (int trial = 0; trial < 50; ++trial) {
        const State x{testing::random_vec(rng, model.m, 3.0),
                      testing::random_vec(rng, model.m, 1.2)};
        const auto out = avf_hamiltonian_substep(model, x, cfg);
        const double h0 = hamiltonian(model, x);
        CHECK(std::abs(hamiltonian(model, out.x_bar) - h0) <=
              10.0 * cfg.options().newton_tol * (1.0 + std::abs(h0)));
        CHECK(out.newton_iters <= 10);
      }
    }
  }
}

TEST_CASE("hamiltonian substep is reversible") {
  std::mt19937_64 rng(21);
  const LangevinModel model = example1_model();
  const AvfConfig cfg(model, 0x1.0p-4);
  for (int trial = 0; trial < 20; ++trial) {
    const State x{testing::random_vec(rng, 1, 2.0), testing::random_vec(rng, 1, 1.5)};
    const State fwd = avf_hamiltonian_substep(model, x, cfg).x_bar;
    const State back = avf_hamiltonian_substep(model, State{-fwd.p, fwd.q}, cfg).x_bar;
    CHECK(std::abs(-back.p[0] - x.p[0]) <= 1e-9);
    CHECK(std::abs(back.q[0] - x.q[0]) <= 1e-9);
  }
}

TEST_CASE("newton divergence is reported") {
  SolverOptions opts;
  opts.newton_max_iter = 1;
  opts.newton_tol = 1e-300;
  const LangevinModel model = example1_model();
  try {
    (void)avf_hamiltonian_substep(model, model.x0, AvfConfig(model, 0.1, opts));
    FAIL("expected NewtonDivergence");
  } catch (const NewtonDivergence& e) {
    CHECK(e.iterations == 1);
    CHECK(e.residual > 0.0);
  }
}

TEST_CASE("ou substep") {
  LangevinModel model = harmonic_model(1.0, 0.0);
  const State x_bar{vec({2.0}), vec({0.3})};
  OUIncrement inc{NoiseVec::Constant(1, 0.7), NoiseVec::Constant(1, 0.4)};
  const State out = ou_substep(model, x_bar, inc, std::log(2.0));
  CHECK(out.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out.q == x_bar.q);

  model.sigma(0, 0) = 2.0;
  const State noisy = ou_substep(model, x_bar, inc, std::log(2.0));
  CHECK(noisy.p[0] == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("avf step keeps Q from the hamiltonian substep") {
  const LangevinModel model = example1_model();
  const auto path = generate_path(4, 1.0, 0x1.0p-8, 1);
  const AvfConfig cfg(model, 0x1.0p-5);
  const auto rec = avf_step(model, model.x0, coarse_increment(path, 0, 0x1.0p-5, 1.0), cfg);
  CHECK(rec.x.q == rec.x_bar.q);
}

TEST_CASE("noiseless free flight with friction has a closed form") {
  const LangevinModel model = testing::make_model(testing::constant_potential(1), 1.0,
                                                  NoiseMat::Zero(1, 1), vec({1.0}), vec({0.0}));
  const double h = 0.125, v = 1.0;
  const AvfConfig cfg(model, h);
  State x = model.x0;
  for (int n = 1; n <= 16; ++n) {
    x = avf_step(model, x, zero_increment(1), cfg).x;
    const double r = std::exp(-v * h);
    CHECK(x.p[0] == doctest::Approx(std::exp(-v * n * h)).epsilon(1e-14));
    CHECK(x.q[0] == doctest::Approx(h * (1.0 - std::pow(r, n)) / (1.0 - r)).epsilon(1e-14));
  }
}

TEST_CASE("tamed euler step") {
  SUBCASE("equilibrium is fixed") {
    const LangevinModel model = harmonic_model(1.0, 0.0);
    const State x{vec({0.0}), vec({0.0})};
    const State out = tamed_euler_step(model, x, NoiseVec::Zero(1), 0.5);
    CHECK(out.p[0] == 0.0);
    CHECK(out.q[0] == 0.0);
  }
  SUBCASE("harmonic hand value") {
    const LangevinModel model = harmonic_model(1.0, 1.0);
    const State out =
        tamed_euler_step(model, State{vec({1.0}), vec({0.0})}, NoiseVec::Zero(1), 0.1);
    const double scale = 0.1 / (1.0 + 0.1 * std::sqrt(2.0));
    CHECK(out.p[0] == doctest::Approx(1.0 - scale).epsilon(1e-15));
    CHECK(out.q[0] == doctest::Approx(scale).epsilon(1e-15));
    CHECK(out.p[0] == doctest::Approx(0.9123899).epsilon(1e-7));
    CHECK(out.q[0] == doctest::Approx(0.0876101).epsilon(1e-6));
  }
  SUBCASE("taming bounds the drift increment") {
    std::mt19937_64 rng(12);
    const LangevinModel model = example1_model();
    for (auto taming : {TamingVariant::drift, TamingVariant::quadratic}) {
      for (int trial = 0; trial < 200; ++trial) {
        const State x{testing::random_vec(rng, 1, 50.0), testing::random_vec(rng, 1, 20.0)};
        const double h = std::ldexp(1.0, -static_cast<int>(trial % 12));
        const State out = tamed_euler_step(model, x, NoiseVec::Zero(1), h, taming);
        const PhaseVec incr = out.stacked() - x.stacked();
        const double a = langevin_drift(model, x).norm();
        CHECK(incr.norm() <= std::min(h * a, 1.0) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("taming variants parse") {
  CHECK(parse_taming("drift") == TamingVariant::drift);
  CHECK(parse_taming("quadratic") == TamingVariant::quadratic);
  CHECK(to_string(TamingVariant::quadratic) == "quadratic");
  CHECK_THROWS_AS(parse_taming("increment"), std::invalid_argument);
  CHECK(parse_scheme("avf_split") == Scheme::avf_split);
  CHECK_THROWS_AS(parse_scheme("rk4"), std::invalid_argument);
}

TEST_CASE("integrate") {
  const LangevinModel model = example1_model();
  const auto path = generate_path(11, 1.0, 0x1.0p-8, 1);

  SUBCASE("grid and determinism") {
    const AvfConfig cfg(model, 0x1.0p-8);
    int max_iters = 0;
    const Trajectory a = integrate(model, Scheme::avf_split, path, cfg,
                                   [&](std::size_t, const StepRecord& r) {
                                     max_iters = std::max(max_iters, r.newton_iters);
                                   });
    const Trajectory b = integrate(model, Scheme::avf_split, path, cfg);
    REQUIRE(a.size() == 257);
    CHECK(max_iters <= 50);
    for (std::size_t n = 0; n < a.size(); ++n) {
      CHECK(a[n].finite());
      CHECK(a[n].p == b[n].p);
      CHECK(a[n].q == b[n].q);
    }
    CHECK(integrate_terminal(model, Scheme::avf_split, path, cfg).p == a.back().p);
  }
  SUBCASE("h = T is a single step; h > T is rejected") {
    CHECK(integrate(model, Scheme::avf_split, path, AvfConfig(model, 1.0)).size() == 2);
    CHECK_THROWS(integrate(model, Scheme::avf_split, path, AvfConfig(model, 2.0)));
  }
  SUBCASE("tamed euler consumes plain increments") {
    const AvfConfig cfg(model, 0x1.0p-6);
    const Trajectory t = integrate(model, Scheme::tamed_euler, path, cfg);
    State x = model.x0;
    for (std::size_t n = 0; n < 64; ++n)
      x = tamed_euler_step(model, x, coarse_increment(path, n, 0x1.0p-6, 1.0).plain, 0x1.0p-6,
                           cfg.options().taming);
    CHECK(t.back().p == x.p);
    CHECK(t.back().q == x.q);
  }
}

TEST_CASE("noiseless quartic run converges at first order") {
  LangevinModel model = example1_model();
  model.sigma = NoiseMat::Zero(1, 1);
  const auto path = generate_path(0, 1.0, 0x1.0p-10, 1);
  auto terminal = [&](double h) {
    return integrate_terminal(model, Scheme::avf_split, path, AvfConfig(model, h)).stacked();
  };
  const double h = 0x1.0p-5;
  const PhaseVec x1 = terminal(h), x2 = terminal(h / 2), x4 = terminal(h / 4);
  const double ratio = (x1 - x2).norm() / (x2 - x4).norm();
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("tamed euler on the harmonic oscillator converges at order one") {
  const LangevinModel model = harmonic_model(1.0, 1.0);
  RunSettings settings;
  settings.h_ref = 0x1.0p-12;
  settings.samples = 200;
  settings.bootstrap_replicates = 0;
  const auto res = strong_error(model, {0x1.0p-5, 0x1.0p-6, 0x1.0p-7, 0x1.0p-8}, settings,
                                Scheme::tamed_euler);
  CHECK(res.fitted_slope >= 0.8);
  CHECK(res.fitted_slope <= 1.2);
}
