#include "leafctl/model.hpp"

#include <cmath>
#include <string>

#include "leafctl/error.hpp"

namespace leafctl {

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::filtered: return "filtered";
    case StrategyKind::unfiltered: return "unfiltered";
    case StrategyKind::open_loop: return "open_loop";
  }
  return "filtered";
}

StrategyKind strategy_from_string(std::string_view name) {
  for (auto kind : kAllStrategies) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::ParseError, "unknown strategy '" + std::string(name) + "'");
}

void finalize_trace(BuildTrace& trace) {
  trace.final_abs_error_pct.reset();
  if (trace.steps.empty() || trace.target_k == 0.0) return;
  const auto& last = trace.steps.back();
  const auto final_k = last.true_stiffness ? last.true_stiffness : last.observed_stiffness;
  if (!final_k) return;
  trace.final_abs_error_pct = std::abs(*final_k - trace.target_k) / trace.target_k * 100.0;
}

double open_loop_density(const BuildPlan& plan, const ProcessModel& model) {
  if (model.alpha == 0.0) throw Error(ErrorCode::ZeroAlpha, "alpha must be nonzero");
  return (plan.target_k / plan.n - model.beta) / model.alpha;
}

void validate(const ProcessModel& model) {
  const auto code = ErrorCode::InvalidPlan;
  require(std::isfinite(model.alpha) && std::isfinite(model.beta) &&
              std::isfinite(model.sigma_p) && std::isfinite(model.sigma_o),
          code, "model parameters must be finite");
  require(model.sigma_p >= 0.0, code, "sigma_p >= 0 violated");
  require(model.sigma_o >= 0.0, code, "sigma_o >= 0 violated");
  require(model.alpha != 0.0, code, "alpha != 0 violated");
}

void validate(const BuildPlan& plan) {
  const auto code = ErrorCode::InvalidPlan;
  require(plan.n >= 1, code, "n >= 1 violated");
  require(std::isfinite(plan.target_k) && plan.target_k > 0.0, code, "target_k > 0 violated");
  require(plan.repetitions >= 1, code, "repetitions >= 1 violated");
  require(std::isfinite(plan.d_min) && std::isfinite(plan.d_max), code,
          "density bounds must be finite");
  require(plan.d_min >= 0.0, code, "0 <= d_min violated");
  require(plan.d_min < plan.d_max, code, "d_min < d_max violated");
  if (plan.density_increment) {
    require(std::isfinite(*plan.density_increment) && *plan.density_increment > 0.0, code,
            "density_increment > 0 violated");
  }
}

void validate(const BuildPlan& plan, const ProcessModel& model) {
  validate(plan);
  validate(model);
  const double d = open_loop_density(plan, model);
  if (d < plan.d_min || d > plan.d_max) {
    throw Error(ErrorCode::InfeasibleTarget,
                "open-loop density " + std::to_string(d) + " outside [" +
                    std::to_string(plan.d_min) + ", " + std::to_string(plan.d_max) + "]");
  }
}

}  // namespace leafctl
