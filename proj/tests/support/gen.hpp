#pragma once

// Hand-rolled generators for property tests, seeded per case.

#include <cstdint>

#include "leafctl/model.hpp"
#include "leafctl/random.hpp"

namespace leafctl::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(derive_key(seed, {0x7e57})) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.uniform() * (hi - lo + 1)); }
  double normal() { return rng_.normal(); }

  ProcessModel model() {
    return ProcessModel{uniform(0.05, 1.0), uniform(0.0, 8.0), uniform(0.05, 2.0), uniform(0.05, 2.0)};
  }

  // Noise levels on the scale of a calibrated printer, where process noise is
  // not negligible next to the averaged measurement noise.
  ProcessModel plausible_model() {
    return ProcessModel{uniform(0.1, 0.6), uniform(2.0, 8.0), uniform(0.5, 2.0), uniform(0.1, 1.5)};
  }

 private:
  CounterRng rng_;
};

}  // namespace leafctl::testing
