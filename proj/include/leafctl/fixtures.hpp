#pragma once

// Reference bench data and generators for synthetic datasets.
//
// Only per-specimen means and standard deviations of the reference bending
// campaign are available, so the shipped trial-level fixture is a moment-exact
// reconstruction: every downstream check depends on those moments alone.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "leafctl/model.hpp"

namespace leafctl::fixtures {

inline constexpr std::array<double, 5> kDensities{10.0, 15.0, 20.0, 25.0, 30.0};
inline constexpr int kSpecimensPerDensity = 3;
inline constexpr int kTrialsPerSpecimen = 5;

// [density][specimen], kg/mm.
inline constexpr std::array<std::array<double, 3>, 5> kSpecimenMeans{{
    {6.4024, 7.5183, 8.4502},
    {10.2724, 8.4851, 8.5846},
    {11.7310, 9.4587, 11.8682},
    {13.1919, 11.4165, 12.8316},
    {12.9317, 14.5737, 12.8644},
}};
inline constexpr std::array<std::array<double, 3>, 5> kSpecimenSds{{
    {0.4432, 0.5480, 0.6473},
    {0.4524, 0.5990, 0.8108},
    {0.5414, 0.6596, 1.7784},
    {0.7581, 0.5805, 0.3430},
    {0.9821, 0.5072, 0.7098},
}};

/// Reference process model fitted from the bench data.
inline constexpr ProcessModel kReferenceModel{0.3073, 4.5593, 1.0579, 0.6907};

inline constexpr std::uint64_t kFixtureSeed = 20180427;

/// `count` values with sample mean `mean` and sample sd `sd` (divisor n - 1),
/// obtained by centring and rescaling seeded normal draws.
std::vector<double> generate_trials(double mean, double sd, int count, std::uint64_t seed);

/// Trial-level reconstruction of the reference bench campaign, CSV form (b).
std::vector<StiffnessRecord> reference_stiffness_dataset();

struct BendingSpec {
  ProcessModel model{0.30, 4.50, 1.00, 0.50};
  int specimens_per_density = 3;
  int trials = 5;
  int points_per_trial = 8;
  double max_deflection_mm = 4.0;
  double load_noise_kg = 0.02;
  std::uint64_t seed = kFixtureSeed;
};

/// Synthetic load/deflection campaign drawn from `spec.model`, CSV form (a).
std::vector<BendingRecord> synthetic_bending_dataset(const BendingSpec& spec = {});

/// Writes every fixture file into `dir` (see docs/formats.md).
void write_fixture_files(const std::filesystem::path& dir);

}  // namespace leafctl::fixtures
