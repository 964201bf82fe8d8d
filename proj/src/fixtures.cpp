#include "leafctl/fixtures.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <json.hpp>

#include "leafctl/calibration.hpp"
#include "leafctl/error.hpp"
#include "leafctl/io.hpp"
#include "leafctl/json.hpp"
#include "leafctl/random.hpp"

namespace leafctl::fixtures {

namespace {

std::string specimen_id(double density, int specimen) {
  return "d" + std::to_string(static_cast<int>(density)) + "-s" + std::to_string(specimen + 1);
}

nlohmann::json recorded_builds_json() {
  using nlohmann::json;
  return json{
      {"description", "stack stiffness observed after each leaf (mean of 5 readings)"},
      {"units", "kg/mm"},
      {"repetitions", 5},
      {"builds",
       json::array({
           json{{"n", 3},
                {"target_k", 30.0},
                {"filtered", {11.53, 19.89, 30.43}},
                {"unfiltered", {11.55, 18.65, 29.24}},
                {"open_loop_final", 33.49},
                {"final_error_pct", {{"filtered", 1.43}, {"unfiltered", 2.53}, {"open_loop", 11.63}}}},
           json{{"n", 3},
                {"target_k", 40.0},
                {"filtered", {12.53, 27.86, 40.89}},
                {"unfiltered", {12.67, 26.31, 42.29}},
                {"open_loop_final", 37.09},
                {"final_error_pct", {{"filtered", 2.23}, {"unfiltered", 5.73}, {"open_loop", 7.28}}}},
       })}};
}

nlohmann::json recorded_densities_json() {
  using nlohmann::json;
  return json{{"description", "infill density applied at each leaf"},
              {"units", "percent"},
              {"builds", json::array({
                             json{{"n", 3},
                                  {"target_k", 30.0},
                                  {"filtered", {17.705, 15.475, 17.375}},
                                  {"unfiltered", {17.705, 15.186, 22.108}},
                                  {"open_loop", 17.705}},
                             json{{"n", 3},
                                  {"target_k", 40.0},
                                  {"filtered", {28.552, 29.648, 24.808}},
                                  {"unfiltered", {28.552, 29.634, 29.734}},
                                  {"open_loop", 28.552}},
                         })}};
}

std::string csv_text(const CalibrationDataset& data) {
  std::ostringstream out;
  io::write_calibration_csv(out, data);
  return out.str();
}

}  // namespace

std::vector<double> generate_trials(double mean, double sd, int count, std::uint64_t seed) {
  if (count < 2) throw Error(ErrorCode::InsufficientReplication, "count >= 2 violated");
  if (!(sd >= 0.0)) throw Error(ErrorCode::InvalidDataset, "sd >= 0 violated");
  const auto n = static_cast<std::size_t>(count);
  std::vector<double> out(n, mean);
  if (sd == 0.0) return out;

  CounterRng rng(derive_key(seed, {}));
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal();
  double m = 0.0;
  for (double v : z) m += v;
  m /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : z) ss += (v - m) * (v - m);
  const double s = std::sqrt(ss / static_cast<double>(n - 1));
  for (std::size_t i = 0; i < n; ++i) out[i] = mean + sd * (z[i] - m) / s;
  return out;
}

std::vector<StiffnessRecord> reference_stiffness_dataset() {
  std::vector<StiffnessRecord> rows;
  for (std::size_t g = 0; g < kDensities.size(); ++g) {
    for (int s = 0; s < kSpecimensPerDensity; ++s) {
      const auto cell = g * kSpecimensPerDensity + static_cast<std::size_t>(s);
      const auto trials = generate_trials(kSpecimenMeans[g][static_cast<std::size_t>(s)],
                                          kSpecimenSds[g][static_cast<std::size_t>(s)],
                                          kTrialsPerSpecimen, kFixtureSeed + cell);
      for (int t = 0; t < kTrialsPerSpecimen; ++t) {
        rows.push_back({specimen_id(kDensities[g], s), kDensities[g], t + 1,
                        trials[static_cast<std::size_t>(t)]});
      }
    }
  }
  return rows;
}

std::vector<BendingRecord> synthetic_bending_dataset(const BendingSpec& spec) {
  std::vector<BendingRecord> rows;
  for (std::size_t g = 0; g < kDensities.size(); ++g) {
    const double density = kDensities[g];
    for (int s = 0; s < spec.specimens_per_density; ++s) {
      const auto id = specimen_id(density, s);
      CounterRng rng(derive_key(spec.seed, {g, static_cast<std::uint64_t>(s)}));
      const double specimen_k = spec.model.leaf_mean(density) + spec.model.sigma_p * rng.normal();
      for (int t = 0; t < spec.trials; ++t) {
        const double trial_k = specimen_k + spec.model.sigma_o * rng.normal();
        for (int p = 0; p < spec.points_per_trial; ++p) {
          const double deflection = spec.max_deflection_mm * (p + 1) / spec.points_per_trial;
          const double load = trial_k * deflection + spec.load_noise_kg * rng.normal();
          rows.push_back({id, density, t + 1, deflection, load});
        }
      }
    }
  }
  return rows;
}

void write_fixture_files(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "models");
  io::write_file(dir / "reference_stiffness.csv", csv_text(reference_stiffness_dataset()));
  const auto bending = synthetic_bending_dataset();
  io::write_file(dir / "synthetic_bending.csv", csv_text(bending));
  io::write_file(dir / "synthetic_bending_stiffness.csv",
                 csv_text(calibration::reduce_bending(bending)));
  io::write_file(dir / "recorded_builds.json", recorded_builds_json().dump(2) + "\n");
  io::write_file(dir / "recorded_densities.json", recorded_densities_json().dump(2) + "\n");
  io::save_model(dir / "models" / "reference.json", kReferenceModel);
}

}  // namespace leafctl::fixtures
