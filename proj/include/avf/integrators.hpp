// SPDX-License-Identifier: Apache-2.0
//
// Splitting AVF scheme: an energy-preserving averaged-vector-field solve of
// the Hamiltonian flow followed by the exact Ornstein-Uhlenbeck flow of
// friction + noise. A tamed Euler scheme serves as fine reference.
#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "avf/model.hpp"
#include "avf/noise.hpp"

namespace avf {

/// Gauss-Legendre rule mapped to [0, 1]; exact for degree <= 2n - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule gauss_legendre(int n);
  [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
};

enum class Scheme { avf_split, tamed_euler };
/// drift:     X' = X + h A0 / (1 + h |A0|)
/// quadratic: X' = X + h A0 / (1 + h^2 |A0|^2), taming bias O(h^2) per unit time
enum class TamingVariant { drift, quadratic };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);
TamingVariant parse_taming(std::string_view name);
std::string_view to_string(TamingVariant taming);

struct SolverOptions {
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  int quadrature_nodes = 0;  // 0: derived from the polynomial degree
  TamingVariant taming = TamingVariant::quadratic;  // reference scheme taming
};

/// Raised when h violates the solvability guard h < 2 / sqrt(K).
class SolvabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A trajectory left the finite range or a step could not be solved.
class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NewtonDivergence : public IntegrationFailure {
 public:
  NewtonDivergence(int iterations, double residual);
  int iterations;
  double residual;
};

/// Quadrature nodes that integrate the averaged gradient and the weighted
/// Hessians exactly for a polynomial potential (8 for callbacks).
int required_quadrature_nodes(const Potential& potential);

/// Validated step configuration. Construction enforces the solvability guard
/// and quadrature exactness.
class AvfConfig {
 public:
  AvfConfig(const LangevinModel& model, double h, SolverOptions options = {});

  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] const SolverOptions& options() const { return options_; }
  [[nodiscard]] const QuadratureRule& rule() const { return rule_; }

 private:
  double h_;
  SolverOptions options_;
  QuadratureRule rule_;
};

/// int_0^1 grad F(a + tau (b - a)) dtau.
Vec avf_averaged_gradient(const Potential& potential, const Vec& a, const Vec& b,
                          const QuadratureRule& rule);

struct SubstepResult {
  State x_bar;
  int newton_iters = 0;
  double residual = 0.0;
};

/// Implicit AVF step of the Hamiltonian flow (P, Q) -> (Pbar, Qbar).
/// Throws NewtonDivergence.
SubstepResult avf_hamiltonian_substep(const LangevinModel& model, const State& x,
                                      const AvfConfig& cfg);

/// Exact OU flow: P <- exp(-v h) Pbar + sigma * convolved, Q unchanged.
State ou_substep(const LangevinModel& model, const State& x_bar,
                 const OUIncrement& inc, double h);

struct StepRecord {
  State x_bar;
  State x;
  int newton_iters = 0;
  double residual = 0.0;
};

StepRecord avf_step(const LangevinModel& model, const State& x,
                    const OUIncrement& inc, const AvfConfig& cfg);

/// A0(x) = (-grad F(q) - v p, p).
PhaseVec langevin_drift(const LangevinModel& model, const State& x);

/// X' = X + h A0(X) / (1 + h |A0(X)|) + (sigma dW, 0) for the drift variant.
State tamed_euler_step(const LangevinModel& model, const State& x,
                       const NoiseVec& dw, double h,
                       TamingVariant taming = TamingVariant::drift);

using Trajectory = std::vector<State>;
using StepObserver = std::function<void(std::size_t n, const StepRecord&)>;

/// Runs T / h steps on the path's grid. AVF consumes convolved increments,
/// tamed Euler consumes plain increments. The observer sees every step.
Trajectory integrate(const LangevinModel& model, Scheme scheme,
                     const PathHierarchy& path, const AvfConfig& cfg,
                     const StepObserver& observer = {});

/// Same as integrate() but only keeps the terminal state.
State integrate_terminal(const LangevinModel& model, Scheme scheme,
                         const PathHierarchy& path, const AvfConfig& cfg,
                         const StepObserver& observer = {});

}  // namespace avf
