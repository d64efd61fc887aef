// SPDX-License-Identifier: Apache-2.0
//
// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw
// is a pure function of (key, counter), so Monte Carlo samples can be
// generated independently and in any order.
#pragma once

#include <array>
#include <cstdint>

namespace avf {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Stream of uniforms/normals for one (seed, stream id) pair.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  /// Standard normal pair for block `block` via Box-Muller on two 53-bit uniforms.
  [[nodiscard]] std::array<double, 2> normal_pair(std::uint64_t block) const;
  /// Uniform on (0, 1] for block `block`, word pair `half` (0 or 1).
  [[nodiscard]] double uniform(std::uint64_t block, int half) const;

 private:
  PhiloxKey key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
};

}  // namespace avf
