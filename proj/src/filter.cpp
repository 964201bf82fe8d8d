#include "leafctl/filter.hpp"

#include <cmath>
#include <string>

#include "leafctl/error.hpp"

namespace leafctl::filter {

double effective_obs_variance(const ProcessModel& model, int repetitions) {
  if (repetitions < 1) {
    throw Error(ErrorCode::InvalidPlan, "repetitions >= 1 violated");
  }
  return model.sigma_o * model.sigma_o / repetitions;
}

BeliefState update(const BeliefState& belief, const ProcessModel& model,
                   double applied_density, const Observation& obs) {
  if (belief.variance < 0.0) {
    throw Error(ErrorCode::InvalidPlan, "belief variance >= 0 violated");
  }
  const double obs_var = effective_obs_variance(model, obs.repetitions);
  const double prior_var = model.sigma_p * model.sigma_p + belief.variance;
  const double total = obs_var + prior_var;
  if (total == 0.0) {
    throw Error(ErrorCode::DegenerateFilter,
                "observation, process and prior variances are all zero at step " +
                    std::to_string(belief.step + 1));
  }
  const double prior_mean = belief.mean + model.leaf_mean(applied_density);
  return BeliefState{
      .step = belief.step + 1,
      .mean = (obs.value * prior_var + prior_mean * obs_var) / total,
      .variance = obs_var * prior_var / total,
  };
}

BeliefState assimilate(const BeliefState& belief, const ProcessModel& model,
                       double applied_density, const Observation& obs) {
  if (effective_obs_variance(model, obs.repetitions) == 0.0) {
    return BeliefState{.step = belief.step + 1, .mean = obs.value, .variance = 0.0};
  }
  return update(belief, model, applied_density, obs);
}

BeliefState propagate(const BeliefState& belief, const ProcessModel& model,
                      double applied_density) {
  return BeliefState{
      .step = belief.step + 1,
      .mean = belief.mean + model.leaf_mean(applied_density),
      .variance = belief.variance + model.sigma_p * model.sigma_p,
  };
}

std::vector<double> variance_sequence(const ProcessModel& model, int repetitions, int steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidPlan, "steps >= 1 violated");
  const double obs_var = effective_obs_variance(model, repetitions);
  const double proc_var = model.sigma_p * model.sigma_p;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  double v = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double prior = proc_var + v;
    const double total = obs_var + prior;
    v = total == 0.0 ? 0.0 : obs_var * prior / total;
    out.push_back(v);
  }
  return out;
}

double steady_state_variance(const ProcessModel& model, int repetitions) {
  const double obs_var = effective_obs_variance(model, repetitions);
  const double proc_var = model.sigma_p * model.sigma_p;
  // v^2 + q v - q r = 0; the discriminant form below avoids cancellation
  // when q is large relative to r.
  const double disc = std::sqrt(proc_var * proc_var + 4.0 * obs_var * proc_var);
  if (disc + proc_var == 0.0) return 0.0;
  return 2.0 * obs_var * proc_var / (proc_var + disc);
}

}  // namespace leafctl::filter
