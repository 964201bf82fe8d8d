#pragma once

// Counter-based random streams.
//
// A stream is a (key, counter) pair. Draw number c of a stream is
// mix64(key + (c + 1) * 0x9E3779B97F4A7C15), i.e. the SplitMix64 output
// function applied to a Weyl sequence, so any draw can be reproduced from the
// key and its index alone. Uniforms take the top 53 bits: (u >> 11 + 0.5) /
// 2^53, which lies strictly inside (0, 1). Normals use the cosine branch of
// Box-Muller on two consecutive uniforms:
//   z = sqrt(-2 ln u1) * cos(2 pi u2).
// Keys for sub-streams are derived by chaining mix64 over the parent key and
// each index, see derive_key.

#include <cstdint>
#include <initializer_list>

namespace leafctl {

std::uint64_t mix64(std::uint64_t x);

/// Key for a sub-stream identified by `parts` under `seed`.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> parts);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  double uniform();
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace leafctl
