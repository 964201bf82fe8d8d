#pragma once

// Process-model calibration from three-point bending tests.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leafctl/model.hpp"

namespace leafctl::calibration {

struct BendingPoint {
  double deflection_mm = 0.0;
  double load_kg = 0.0;

  bool operator==(const BendingPoint&) const = default;
};

struct SpecimenSummary {
  std::string specimen_id;
  double density_pct = 0.0;
  std::vector<double> trial_stiffnesses;  // ascending trial index
  double mean_stiffness = 0.0;
  std::optional<double> sd_stiffness;     // sample sd, needs >= 2 trials
};

struct AffineFit {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Least-squares slope of load on deflection (intercept fitted, not
/// returned). Throws DegenerateRegression when fewer than two distinct
/// deflections are present.
double stiffness_from_bending(std::span<const BendingPoint> points);

/// One stiffness record per (specimen, trial) of raw bending data, ordered by
/// specimen id then trial. Points are sorted by deflection before the fit.
std::vector<StiffnessRecord> reduce_bending(const std::vector<BendingRecord>& rows);

/// Per-specimen trial stiffnesses and their mean and sample sd. Output is
/// ordered by specimen id; trials by trial index. Raw points are sorted before
/// regression, so row order in the input never matters.
std::vector<SpecimenSummary> summarize_specimens(const CalibrationDataset& data);

/// Line through the per-density group means of the specimen means.
AffineFit fit_affine_model(std::span<const SpecimenSummary> summaries);

/// Mean over density groups of the sample sd of the specimen means in that
/// group. Groups with a single specimen are skipped.
double estimate_sigma_p(std::span<const SpecimenSummary> summaries);

/// Mean over specimens of the per-specimen sample sd.
double estimate_sigma_o(std::span<const SpecimenSummary> summaries);

/// Full pipeline. Errors are rethrown with the failing stage prefixed.
ProcessModel calibrate(const CalibrationDataset& data);

}  // namespace leafctl::calibration
