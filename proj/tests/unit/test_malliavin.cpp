// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "avf/malliavin.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace avf;
using testing::vec;

namespace {

LangevinModel example2_full_rank() {
  LangevinModel model = example2_model();
  model.sigma = NoiseMat::Identity(2, 2);
  return model;
}

// Noise-free one-step map (P, Q) -> (P_{n+1}, Q_{n+1}).
PhaseVec step_map(const LangevinModel& model, const AvfConfig& cfg, const PhaseVec& x) {
  const int m = model.m;
  const State s{x.head(m), x.tail(m)};
  const OUIncrement zero{NoiseVec::Zero(model.d), NoiseVec::Zero(model.d)};
  return avf_step(model, s, zero, cfg).x.stacked();
}

}  // namespace

TEST_CASE("averaged hessians of the quartic") {
  const Potential f = builtin_potential("quartic1d");
  const auto rule = QuadratureRule::gauss_legendre(2);
  const auto h01 = averaged_hessians(f, vec({0.0}), vec({1.0}), rule);
  CHECK(h01.f1(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(h01.f2(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h01.f1(0, 0) + h01.f2(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  const auto h11 = averaged_hessians(f, vec({1.0}), vec({1.0}), rule);
  CHECK(h11.f1(0, 0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(h11.f2(0, 0) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("averaged hessians match exact polynomial integrals") {
  std::mt19937_64 rng(99);
  const std::vector<std::pair<const char*, std::vector<Monomial>>> cases{
      {"quartic1d", {{1.0, {4}}}},
      {"coupled2d", {{1.0, {8, 0}}, {1.0, {0, 2}}, {2.0, {1, 1}}}}};
  for (const auto& [name, terms] : cases) {
    const Potential f = builtin_potential(name);
    const int m = f.dimension();
    const auto rule = QuadratureRule::gauss_legendre(required_quadrature_nodes(f));
    const double k = f.hessian_lower_bound();
    for (int trial = 0; trial < 200; ++trial) {
      const Vec a = testing::random_vec(rng, m, 1.5), b = testing::random_vec(rng, m, 1.5);
      const auto ab = averaged_hessians(f, a, b, rule);
      const auto ba = averaged_hessians(f, b, a, rule);
      const Mat f1 = oracle::exact_weighted_hessian(terms, m, a, b, {0.0, 1.0});
      const Mat f2 = oracle::exact_weighted_hessian(terms, m, a, b, {1.0, -1.0});
      const Mat full = oracle::exact_weighted_hessian(terms, m, a, b, {1.0});
      const double scale = std::max(1.0, full.norm());
      CHECK((ab.f1 - f1).norm() <= 1e-12 * scale);
      CHECK((ab.f2 - f2).norm() <= 1e-12 * scale);
      CHECK((ab.f1 + ab.f2 - full).norm() <= 1e-12 * scale);
      CHECK((ab.f1 - ba.f2).norm() <= 1e-12 * scale);
      CHECK((ab.f1 - ab.f1.transpose()).norm() <= 1e-12 * scale);
      Eigen::SelfAdjointEigenSolver<Mat> e1(ab.f1), e2(ab.f2);
      CHECK(e1.eigenvalues()[0] >= -k / 2 - 1e-12);
      CHECK(e2.eigenvalues()[0] >= -k / 2 - 1e-12);
    }
  }
}

TEST_CASE("propagator matrix special cases") {
  SUBCASE("constant potential") {
    const LangevinModel model = testing::make_model(testing::constant_potential(2), 0.7,
                                                    NoiseMat::Identity(2, 2), vec({0.0, 0.0}),
                                                    vec({0.0, 0.0}));
    const AveragedHessians zero{Mat::Zero(2, 2), Mat::Zero(2, 2)};
    const double h = 0.3, e = std::exp(-0.7 * 0.3);
    PhaseMat expected = PhaseMat::Zero(4, 4);
    expected.topLeftCorner(2, 2) = e * Mat::Identity(2, 2);
    expected.bottomLeftCorner(2, 2) = h * Mat::Identity(2, 2);
    expected.bottomRightCorner(2, 2) = Mat::Identity(2, 2);
    CHECK((propagator_matrix(model, zero, h) - expected).norm() <= 1e-15);
  }
  SUBCASE("zero step is the identity") {
    const LangevinModel model = example2_full_rank();
    const AveragedHessians hess{Mat::Identity(2, 2) * 3.0, Mat::Identity(2, 2)};
    CHECK((propagator_matrix(model, hess, 0.0) - PhaseMat::Identity(4, 4)).norm() == 0.0);
  }
  SUBCASE("harmonic, no friction, h = 1") {
    LangevinModel model = testing::make_model(builtin_potential("harmonic"), 1e-300,
                                              NoiseMat::Ones(1, 1), vec({0.0}), vec({0.0}));
    const AveragedHessians half{Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 0.5)};
    PhaseMat expected(2, 2);
    expected << 0.6, -0.8, 0.8, 0.6;
    CHECK((propagator_matrix(model, half, 1.0) - expected).norm() <= 1e-15);
  }
}

TEST_CASE("propagator matrix equals the finite-difference step Jacobian") {
  std::mt19937_64 rng(5);
  for (const LangevinModel& model : {example1_model(), example2_full_rank()}) {
    const int m = model.m;
    for (double h : {0x1.0p-2, 0x1.0p-5}) {
      SolverOptions opts;
      opts.newton_tol = 1e-15;
      const AvfConfig cfg(model, h, opts);
      for (int trial = 0; trial < 20; ++trial) {
        PhaseVec x(2 * m);
        x << testing::random_vec(rng, m, 2.0), testing::random_vec(rng, m, 1.2);
        const PhaseVec next = step_map(model, cfg, x);
        const auto hess =
            averaged_hessians(model.potential, x.tail(m), next.tail(m), cfg.rule());
        const PhaseMat a = propagator_matrix(model, hess, h);
        PhaseMat fd(2 * m, 2 * m);
        const double eps = 1e-6;
        for (int j = 0; j < 2 * m; ++j) {
          PhaseVec up = x, down = x;
          up[j] += eps;
          down[j] -= eps;
          fd.col(j) = (step_map(model, cfg, up) - step_map(model, cfg, down)) / (2 * eps);
        }
        CHECK((fd - a).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, a.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("covariance recursion") {
  SUBCASE("first step injects only the noise") {
    const LangevinModel model = example1_model();
    const double h = 0x1.0p-4;
    const AveragedHessians hess{Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0)};
    const MalliavinState g1 = gamma_step(model, MalliavinState::initial(1), hess, h);
    CHECK(g1.step == 1);
    CHECK(g1.gamma(0, 0) == doctest::Approx(ou_variance_factor(1.0, h)).epsilon(1e-15));
    CHECK(g1.gamma(0, 1) == 0.0);
    CHECK(g1.gamma(1, 1) == 0.0);
    CHECK(spectral_summary(g1.gamma).det == 0.0);
    CHECK(spectral_summary(g1.gamma).rank == 1);
  }
  SUBCASE("constant potential closed form") {
    const LangevinModel model = testing::make_model(testing::constant_potential(1), 1.0,
                                                    NoiseMat::Ones(1, 1), vec({0.0}), vec({0.0}));
    const AveragedHessians zero{Mat::Zero(1, 1), Mat::Zero(1, 1)};
    for (double h : {1.0, 0.25, 0x1.0p-8}) {
      const double e = std::exp(-h), nu = ou_variance_factor(1.0, h);
      MalliavinState g = gamma_step(model, MalliavinState::initial(1), zero, h);
      g = gamma_step(model, g, zero, h);
      PhaseMat expected(2, 2);
      expected << nu * (1 + e * e), nu * e * h, nu * e * h, nu * h * h;
      CHECK((g.gamma - expected).cwiseAbs().maxCoeff() <= 1e-12 * expected.cwiseAbs().maxCoeff());
    }
  }
  SUBCASE("small friction limit") {
    const LangevinModel model = testing::make_model(testing::constant_potential(1), 1e-10,
                                                    NoiseMat::Ones(1, 1), vec({0.0}), vec({0.0}));
    const AveragedHessians zero{Mat::Zero(1, 1), Mat::Zero(1, 1)};
    MalliavinState g = gamma_step(model, MalliavinState::initial(1), zero, 1.0);
    g = gamma_step(model, g, zero, 1.0);
    PhaseMat expected(2, 2);
    expected << 2.0, 1.0, 1.0, 1.0;
    CHECK((g.gamma - expected).cwiseAbs().maxCoeff() <= 1e-9);
    const SpectralSummary s = spectral_summary(g.gamma);
    CHECK(s.det == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.lambda_min == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-9));
    CHECK(s.lambda_min == doctest::Approx(0.381966).epsilon(1e-6));
  }
}

TEST_CASE("rank ladder along sampled paths") {
  for (const LangevinModel& model : {example1_model(), example2_full_rank()}) {
    const AvfConfig cfg(model, 0x1.0p-7);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto path = PathHierarchy::generate(31, s, 1.0, 0x1.0p-10, model.d);
      const CovarianceDiagnostics d = covariance_diagnostics(model, path, cfg);
      CHECK(d.rank_first == model.m);
      CHECK(std::abs(d.det_first) <= 1e-14 * std::pow(d.lambda_max_first, 2 * model.m));
      CHECK(d.rank_deficient_steps == 0);
      CHECK(d.min_lambda_from_second > 0.0);
      CHECK(d.min_lambda_all >= -1e-10);
      CHECK(d.min_f1_eigenvalue >= -model.potential.hessian_lower_bound() / 2);
      CHECK(d.min_f2_eigenvalue >= -model.potential.hessian_lower_bound() / 2);

      const Trajectory traj = integrate(model, Scheme::avf_split, path, cfg);
      const auto gammas = propagate_covariance(model, traj, cfg);
      REQUIRE(gammas.size() == traj.size());
      CHECK((gammas.back() - d.terminal).norm() == 0.0);
      for (const auto& g : gammas) CHECK((g - g.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("nondegeneracy report") {
  const LangevinModel model = example1_model();
  std::vector<GammaSamples> data;
  std::vector<GammaSamples> second_step;
  for (double h : {0x1.0p-5, 0x1.0p-6, 0x1.0p-7}) {
    const AvfConfig cfg(model, h);
    GammaSamples g{h, {}}, g2{h, {}};
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto path = PathHierarchy::generate(404, s, 1.0, 0x1.0p-10, 1);
      const auto gammas =
          propagate_covariance(model, integrate(model, Scheme::avf_split, path, cfg), cfg);
      g.gammas.push_back(gammas.back());
      g2.gammas.push_back(gammas[2]);
    }
    data.push_back(std::move(g));
    second_step.push_back(std::move(g2));
  }
  const NondegeneracyReport rep = nondegeneracy_report(data);
  REQUIRE(rep.per_h.size() == 3);
  CHECK(rep.all_positive);
  CHECK(std::isfinite(rep.inv_det_growth_exponent));
  CHECK(std::isfinite(rep.inv_lambda_growth_exponent));
  CHECK(rep.lambda_growth_within_cubic);
  for (const auto& d : rep.per_h) {
    CHECK(d.samples == 100);
    CHECK(d.nonpositive == 0);
    CHECK(d.lambda_min_min <= d.lambda_min_median);
    CHECK(d.lambda_min_median <= d.lambda_min_max);
    CHECK(std::isfinite(d.mean_inv_lambda_sq));
  }
  // At fixed T the terminal covariance converges as h -> 0, so the median
  // smallest eigenvalue stays put when h halves (calibrated ratio 1.00).
  for (std::size_t i = 0; i + 1 < rep.per_h.size(); ++i) {
    const double ratio = rep.per_h[i].lambda_min_median / rep.per_h[i + 1].lambda_min_median;
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 1.5);
  }
  // After two steps the smallest eigenvalue scales between h and h^3.
  const NondegeneracyReport early = nondegeneracy_report(second_step);
  for (std::size_t i = 0; i + 1 < early.per_h.size(); ++i) {
    const double ratio = early.per_h[i].lambda_min_median / early.per_h[i + 1].lambda_min_median;
    CHECK(ratio >= 2.0);
    CHECK(ratio <= 16.0);
  }

  CHECK_THROWS_AS(nondegeneracy_report({data[0]}), std::invalid_argument);
  GammaSamples few{0.1, {PhaseMat::Identity(2, 2)}};
  CHECK_THROWS_AS(nondegeneracy_report({few, few}), std::invalid_argument);
}

TEST_CASE("malliavin finite-difference check") {
  SUBCASE("linear dynamics") {
    const LangevinModel model = testing::make_model(builtin_potential("harmonic"), 1.0,
                                                    NoiseMat::Ones(1, 1), vec({1.0}), vec({1.0}));
    const auto path = PathHierarchy::generate(6, 0, 1.0, 0x1.0p-10, 1);
    const AvfConfig cfg(model, 0x1.0p-6);
    const auto a = malliavin_fd_check(model, path, cfg, 300, 0, 1e-3);
    const auto b = malliavin_fd_check(model, path, cfg, 300, 0, 5e-4);
    CHECK(a.rel_error <= 1e-9);
    CHECK(b.rel_error <= 1e-9);
    const LangevinModel flat = testing::make_model(testing::constant_potential(1), 1.0,
                                                   NoiseMat::Ones(1, 1), vec({1.0}), vec({1.0}));
    CHECK(malliavin_fd_check(flat, path, AvfConfig(flat, 0x1.0p-6), 700, 0, 0.1).rel_error <=
          1e-9);
  }
  SUBCASE("quartic potential") {
    const LangevinModel model = example1_model();
    const AvfConfig cfg(model, 0x1.0p-8);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto path = PathHierarchy::generate(12, s, 1.0, 0x1.0p-12, 1);
      const auto r = malliavin_fd_check(model, path, cfg, 100 + 700 * s, 0, 1e-5);
      CHECK(r.rel_error <= 1e-3);
    }
  }
  SUBCASE("argument checks") {
    const LangevinModel model = example1_model();
    const auto path = PathHierarchy::generate(12, 0, 1.0, 0x1.0p-8, 1);
    const AvfConfig cfg(model, 0x1.0p-6);
    CHECK_THROWS_AS(malliavin_fd_check(model, path, cfg, 10, 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(malliavin_fd_check(model, path, cfg, 256, 0, 1e-5), std::out_of_range);
    CHECK_THROWS_AS(malliavin_fd_check(model, path, cfg, 10, 1, 1e-5), std::out_of_range);
  }
}
