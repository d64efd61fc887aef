// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "avf/model.hpp"

namespace avf::detail {

/// Empty when the polynomial passes the bounded-below test, else the reason.
std::string bounded_below_violation(const Polynomial& poly);

}  // namespace avf::detail
