#pragma once

// Receding-horizon density control toward a target stack stiffness.

#include <span>
#include <vector>

#include "leafctl/model.hpp"

namespace leafctl::control {

struct ControlDecision {
  double recommended_density = 0.0;
  bool clamped = false;
  double unclamped_density = 0.0;
  double predicted_final_mean = 0.0;
  double predicted_final_sd = 0.0;

  bool operator==(const ControlDecision&) const = default;
};

struct FinalPrediction {
  double mean = 0.0;
  double sd = 0.0;
};

/// Mean stiffness each remaining leaf must contribute so that the expected
/// final stiffness hits the target. Under an affine leaf law this equal split
/// minimizes the sum of squared densities over all allocations that reach it.
double allocate_equal_split(double target_k, double current_mean, int remaining);

/// Density for leaf `step + 1` given the current belief mean: the density that
/// would meet the target if every remaining leaf used it, clamped to the plan
/// bounds (and snapped to `density_increment` first, when set). Only this
/// leaf is committed; the next call re-plans from the updated belief.
ControlDecision optimal_density(const BuildPlan& plan, const ProcessModel& model,
                                const BeliefState& belief);
ControlDecision optimal_density(const BuildPlan& plan, const ProcessModel& model,
                                double belief_mean, int step);

/// Expected final stiffness when the remaining leaves are printed at
/// `future_densities`, with a standard deviation that adds one process-noise
/// variance per remaining leaf to the current belief variance.
FinalPrediction predict_final(const BuildPlan& plan, const ProcessModel& model,
                              const BeliefState& belief, std::span<const double> future_densities);

struct DegeneracyReport {
  std::vector<std::vector<double>> allocations;
  std::vector<double> density_sums;
  bool constant = false;
  // A single remaining leaf leaves only one feasible allocation.
  bool vacuous = false;
};

/// Shows that the total density (linear material cost) takes the same value
/// for every allocation whose expected stiffness meets the target, which is
/// why the quadratic cost is the one used for control.
DegeneracyReport linear_cost_degeneracy_check(const BuildPlan& plan, const ProcessModel& model,
                                              double belief_mean = 0.0, int step = 0);

}  // namespace leafctl::control
