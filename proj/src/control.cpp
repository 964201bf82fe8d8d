#include "leafctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "leafctl/error.hpp"

namespace leafctl::control {

double allocate_equal_split(double target_k, double current_mean, int remaining) {
  if (remaining <= 0) {
    throw Error(ErrorCode::NoLeavesRemaining, "no leaves remain to allocate");
  }
  return (target_k - current_mean) / remaining;
}

ControlDecision optimal_density(const BuildPlan& plan, const ProcessModel& model,
                                const BeliefState& belief) {
  if (model.alpha == 0.0) throw Error(ErrorCode::ZeroAlpha, "alpha must be nonzero");
  if (belief.step < 0 || belief.step >= plan.n) {
    throw Error(ErrorCode::NoLeavesRemaining,
                "step " + std::to_string(belief.step) + " is not below n = " + std::to_string(plan.n));
  }
  const int remaining = plan.n - belief.step;
  const double raw = (plan.target_k - belief.mean) / (model.alpha * remaining) -
                     model.beta / model.alpha;

  double d = raw;
  if (plan.density_increment) d = std::round(d / *plan.density_increment) * *plan.density_increment;
  d = std::clamp(d, plan.d_min, plan.d_max);

  ControlDecision decision{.recommended_density = d, .clamped = d != raw, .unclamped_density = raw};
  const std::vector<double> future(static_cast<std::size_t>(remaining), d);
  const auto prediction = predict_final(plan, model, belief, future);
  decision.predicted_final_mean = prediction.mean;
  decision.predicted_final_sd = prediction.sd;
  return decision;
}

ControlDecision optimal_density(const BuildPlan& plan, const ProcessModel& model,
                                double belief_mean, int step) {
  return optimal_density(plan, model, BeliefState{.step = step, .mean = belief_mean});
}

FinalPrediction predict_final(const BuildPlan& plan, const ProcessModel& model,
                              const BeliefState& belief, std::span<const double> future_densities) {
  const auto remaining = plan.n - belief.step;
  if (remaining < 0 || static_cast<std::size_t>(remaining) != future_densities.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(remaining) + " future densities, got " +
                    std::to_string(future_densities.size()));
  }
  double mean = belief.mean;
  for (double d : future_densities) mean += model.leaf_mean(d);
  const double var = belief.variance + remaining * model.sigma_p * model.sigma_p;
  return {mean, std::sqrt(var)};
}

DegeneracyReport linear_cost_degeneracy_check(const BuildPlan& plan, const ProcessModel& model,
                                              double belief_mean, int step) {
  if (model.alpha == 0.0) throw Error(ErrorCode::ZeroAlpha, "alpha must be nonzero");
  const int remaining = plan.n - step;
  const double per_leaf = allocate_equal_split(plan.target_k, belief_mean, remaining);
  const auto count = static_cast<std::size_t>(remaining);
  const auto to_density = [&](double stiffness) { return (stiffness - model.beta) / model.alpha; };

  DegeneracyReport report;
  report.vacuous = remaining == 1;

  // Equal split, then all the slack moved onto the first leaf, then onto the
  // last one. Each keeps the total expected stiffness at K - mu.
  const double shift = remaining > 1 ? 0.5 * std::max(std::abs(per_leaf), 1.0) : 0.0;
  std::vector<double> equal(count, to_density(per_leaf));
  std::vector<double> front(count, to_density(per_leaf - shift));
  std::vector<double> back(count, to_density(per_leaf - shift));
  front.front() = to_density(per_leaf + shift * (remaining - 1));
  back.back() = to_density(per_leaf + shift * (remaining - 1));
  report.allocations = {equal, front, back};

  for (const auto& alloc : report.allocations) {
    double sum = 0.0;
    for (double d : alloc) sum += d;
    report.density_sums.push_back(sum);
  }
  const auto [lo, hi] = std::minmax_element(report.density_sums.begin(), report.density_sums.end());
  report.constant = (*hi - *lo) <= 1e-9 * std::max(1.0, std::abs(*hi));
  return report;
}

}  // namespace leafctl::control
