// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avf/integrators.hpp"

namespace avf::detail {

/// int_0^1 hess F(a + tau (b - a)) * tau dtau (weight tau) or * (1 - tau).
Mat weighted_averaged_hessian(const Potential& potential, const Vec& a, const Vec& b,
                              const QuadratureRule& rule, bool weight_tau);

/// Solves (I + c S) x = rhs for symmetric S with I + c S positive definite.
Vec solve_shifted_symmetric(const Mat& s, double c, const Vec& rhs);

}  // namespace avf::detail
