#pragma once

// Shared domain types. Units are fixed across the project: stiffness in
// kg/mm, infill density in percent.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace leafctl {

/// Affine density-to-stiffness law with Gaussian process and observation
/// noise. A single leaf printed at density d has stiffness
/// alpha * d + beta + N(0, sigma_p^2); a single bending measurement adds
/// N(0, sigma_o^2).
struct ProcessModel {
  double alpha = 0.0;    // kg/mm per %
  double beta = 0.0;     // kg/mm
  double sigma_p = 0.0;  // kg/mm
  double sigma_o = 0.0;  // kg/mm

  double leaf_mean(double density) const { return alpha * density + beta; }

  bool operator==(const ProcessModel&) const = default;
};

struct BuildPlan {
  int n = 1;
  double target_k = 0.0;
  int repetitions = 5;
  double d_min = 0.0;
  double d_max = 100.0;
  // Printer-supported density step; densities are left continuous when unset.
  std::optional<double> density_increment;

  bool operator==(const BuildPlan&) const = default;
};

/// Gaussian posterior over the cumulative stiffness of the first `step` leaves.
struct BeliefState {
  int step = 0;
  double mean = 0.0;
  double variance = 0.0;

  bool operator==(const BeliefState&) const = default;
};

enum class StrategyKind { filtered, unfiltered, open_loop };

inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::filtered, StrategyKind::unfiltered, StrategyKind::open_loop};

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_from_string(std::string_view name);

struct StepRecord {
  double applied_density = 0.0;
  std::optional<double> true_stiffness;      // simulation only
  std::optional<double> observed_stiffness;  // absent for unmeasured open-loop steps
  BeliefState belief_after;

  bool operator==(const StepRecord&) const = default;
};

struct BuildTrace {
  StrategyKind strategy = StrategyKind::filtered;
  double target_k = 0.0;
  std::vector<StepRecord> steps;
  // |K_final - K| / K * 100 where K_final is the true stiffness when known,
  // otherwise the last observation. Unset until the trace is complete.
  std::optional<double> final_abs_error_pct;

  bool operator==(const BuildTrace&) const = default;
};

/// Fills final_abs_error_pct from the last step, if the trace has one.
void finalize_trace(BuildTrace& trace);

// Calibration data, CSV form (a): raw load/deflection samples.
struct BendingRecord {
  std::string specimen_id;
  double density_pct = 0.0;
  int trial = 0;
  double deflection_mm = 0.0;
  double load_kg = 0.0;

  bool operator==(const BendingRecord&) const = default;
};

// Calibration data, CSV form (b): one stiffness per trial.
struct StiffnessRecord {
  std::string specimen_id;
  double density_pct = 0.0;
  int trial = 0;
  double stiffness = 0.0;

  bool operator==(const StiffnessRecord&) const = default;
};

using CalibrationDataset =
    std::variant<std::vector<BendingRecord>, std::vector<StiffnessRecord>>;

/// Density every leaf would get without feedback: (K/n - beta) / alpha.
double open_loop_density(const BuildPlan& plan, const ProcessModel& model);

void validate(const ProcessModel& model);
void validate(const BuildPlan& plan);

/// Throws InvalidPlan naming the violated invariant, or InfeasibleTarget when
/// the open-loop density lies outside [d_min, d_max].
void validate(const BuildPlan& plan, const ProcessModel& model);

}  // namespace leafctl
