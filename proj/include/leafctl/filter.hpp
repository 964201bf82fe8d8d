#pragma once

// Scalar Gauss-linear filtering of the cumulative stack stiffness.

#include <vector>

#include "leafctl/model.hpp"

namespace leafctl::filter {

/// A stack measurement: the average of `repetitions` raw bending readings.
struct Observation {
  double value = 0.0;
  int repetitions = 1;

  bool operator==(const Observation&) const = default;
};

/// sigma_o^2 / r: averaging r independent readings shrinks the noise variance.
double effective_obs_variance(const ProcessModel& model, int repetitions);

/// Posterior after printing one more leaf at `applied_density` and observing
/// the stack. Prior for the new stack is N(mean + leaf_mean(d), variance +
/// sigma_p^2); the observation is weighted against it by inverse variance.
/// Throws DegenerateFilter when every variance term is zero.
BeliefState update(const BeliefState& belief, const ProcessModel& model,
                   double applied_density, const Observation& obs);

/// Same as `update`, except that an observation with zero effective noise is
/// taken as exact (mean = value, variance = 0), which is the limit of
/// `update` as the observation variance goes to zero. This is the step used by
/// the closed-loop runners so that noiseless configurations stay well defined.
BeliefState assimilate(const BeliefState& belief, const ProcessModel& model,
                       double applied_density, const Observation& obs);

/// Prior propagation through one print with no measurement.
BeliefState propagate(const BeliefState& belief, const ProcessModel& model,
                      double applied_density);

/// Posterior variances sigma_1^2 .. sigma_steps^2 starting from sigma_0^2 = 0.
/// They do not depend on the observed values.
std::vector<double> variance_sequence(const ProcessModel& model, int repetitions, int steps);

/// Nonnegative fixed point of the variance recursion.
double steady_state_variance(const ProcessModel& model, int repetitions);

}  // namespace leafctl::filter
