// SPDX-License-Identifier: Apache-2.0
#include "avf/integrators.hpp"

namespace avf {

PhaseVec langevin_drift(const LangevinModel& model, const State& x) {
  PhaseVec a(2 * x.p.size());
  a << -model.potential.gradient(x.q) - model.friction * x.p, x.p;
  return a;
}

State tamed_euler_step(const LangevinModel& model, const State& x, const NoiseVec& dw,
                       double h, TamingVariant taming) {
  const int m = static_cast<int>(x.p.size());
  const PhaseVec drift = langevin_drift(model, x);
  const double scale = taming == TamingVariant::drift
                           ? 1.0 + h * drift.norm()
                           : 1.0 + h * h * drift.squaredNorm();
  const PhaseVec incr = (h / scale) * drift;
  State out;
  out.p = x.p + incr.head(m) + model.sigma * dw;
  out.q = x.q + incr.tail(m);
  return out;
}

}  // namespace avf
