// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "avf/integrators.hpp"

namespace avf {
namespace {

template <class Sink>
void run_steps(const LangevinModel& model, Scheme scheme, const PathHierarchy& path,
               const AvfConfig& cfg, const StepObserver& observer, Sink&& sink) {
  if (path.noise_dim() != model.d)
    throw std::invalid_argument("path noise dimension does not match model d");
  const double h = cfg.h();
  const std::size_t ratio = path.ratio_for(h);
  const std::size_t steps = path.fine_steps() / ratio;
  const auto weights = ou_weights(model.friction, path.h_ref(), ratio);

  State x = model.x0;
  sink(x);
  for (std::size_t n = 0; n < steps; ++n) {
    const OUIncrement inc = coarse_increment(path, n, weights);
    StepRecord rec;
    if (scheme == Scheme::avf_split) {
      rec = avf_step(model, x, inc, cfg);
    } else {
      rec.x = tamed_euler_step(model, x, inc.plain, h, cfg.options().taming);
      rec.x_bar = rec.x;
    }
    if (!rec.x.finite())
      throw IntegrationFailure("non-finite state at step " + std::to_string(n + 1));
    if (observer) observer(n, rec);
    x = std::move(rec.x);
    sink(x);
  }
}

}  // namespace

Trajectory integrate(const LangevinModel& model, Scheme scheme, const PathHierarchy& path,
                     const AvfConfig& cfg, const StepObserver& observer) {
  Trajectory traj;
  traj.reserve(path.fine_steps() / path.ratio_for(cfg.h()) + 1);
  run_steps(model, scheme, path, cfg, observer, [&](const State& x) { traj.push_back(x); });
  return traj;
}

State integrate_terminal(const LangevinModel& model, Scheme scheme,
                         const PathHierarchy& path, const AvfConfig& cfg,
                         const StepObserver& observer) {
  State last;
  run_steps(model, scheme, path, cfg, observer, [&](const State& x) { last = x; });
  return last;
}

}  // namespace avf
