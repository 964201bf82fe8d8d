#include "leafctl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "leafctl/control.hpp"
#include "leafctl/error.hpp"
#include "leafctl/io.hpp"
#include "leafctl/json.hpp"

namespace leafctl::simulate {

namespace {

constexpr std::uint64_t kProcessTag = 0x70726f63;  // "proc"
constexpr std::uint64_t kObserveTag = 0x6f627376;  // "obsv"

// Shared decision loop. `print(d)` returns the true stack stiffness if known;
// `measure(i)` returns the observation taken after leaf i + 1, if any.
template <typename Print, typename Measure>
BuildTrace drive(const BuildPlan& plan, const ProcessModel& model, StrategyKind kind, Print&& print,
                 Measure&& measure) {
  BuildTrace trace{.strategy = kind, .target_k = plan.target_k};
  trace.steps.reserve(static_cast<std::size_t>(plan.n));
  BeliefState belief;
  const double fixed_density = control::optimal_density(plan, model, belief).recommended_density;

  for (int i = 0; i < plan.n; ++i) {
    const double d = kind == StrategyKind::open_loop
                         ? fixed_density
                         : control::optimal_density(plan, model, belief).recommended_density;
    StepRecord record{.applied_density = d};
    record.true_stiffness = print(d);

    const bool measured = kind != StrategyKind::open_loop || i == plan.n - 1;
    const auto obs = measured ? measure(i) : std::nullopt;
    if (obs) record.observed_stiffness = obs->value;

    if (!obs || kind == StrategyKind::open_loop) {
      belief = filter::propagate(belief, model, d);
    } else if (kind == StrategyKind::filtered) {
      belief = filter::assimilate(belief, model, d, *obs);
    } else {
      belief = BeliefState{.step = belief.step + 1, .mean = obs->value, .variance = 0.0};
    }
    record.belief_after = belief;
    trace.steps.push_back(record);
  }
  finalize_trace(trace);
  return trace;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

nlohmann::json stats_json(const ErrorStats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"p05", s.p05}, {"p50", s.p50}, {"p95", s.p95}};
}

ErrorStats stats_from_json(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("sd").get<double>(), j.at("p05").get<double>(),
          j.at("p50").get<double>(), j.at("p95").get<double>()};
}

}  // namespace

TrialStreams derive_streams(std::uint64_t seed, StrategyKind kind, int trial, bool paired) {
  const std::uint64_t strategy = paired ? 0 : static_cast<std::uint64_t>(kind) + 1;
  const auto t = static_cast<std::uint64_t>(trial);
  return TrialStreams{CounterRng(derive_key(seed, {kProcessTag, strategy, t})),
                      CounterRng(derive_key(seed, {kObserveTag, strategy, t}))};
}

double print_leaf(double stack_k, const ProcessModel& model, double density, CounterRng& rng) {
  return stack_k + model.leaf_mean(density) + model.sigma_p * rng.normal();
}

filter::Observation measure_stack(double stack_k, const ProcessModel& model, int repetitions,
                                  CounterRng& rng) {
  if (repetitions < 1) throw Error(ErrorCode::InvalidPlan, "repetitions >= 1 violated");
  double noise = 0.0;
  for (int k = 0; k < repetitions; ++k) noise += model.sigma_o * rng.normal();
  return {stack_k + noise / repetitions, repetitions};
}

BuildTrace run_strategy(const SimConfig& config, StrategyKind kind, TrialStreams& streams) {
  validate(config.plan, config.assumed());
  double stack_k = 0.0;
  return drive(
      config.plan, config.assumed(), kind,
      [&](double d) -> std::optional<double> {
        stack_k = print_leaf(stack_k, config.model_true, d, streams.process);
        return stack_k;
      },
      [&](int) -> std::optional<filter::Observation> {
        return measure_stack(stack_k, config.model_true, config.plan.repetitions,
                             streams.observation);
      });
}

BuildTrace replay_strategy(const BuildPlan& plan, const ProcessModel& model, StrategyKind kind,
                           std::span<const filter::Observation> observations) {
  validate(plan, model);
  const auto needed = static_cast<std::size_t>(plan.n - 1);
  if (kind != StrategyKind::open_loop && observations.size() < needed) {
    throw Error(ErrorCode::LengthMismatch, "closed-loop replay needs at least n - 1 observations");
  }
  return drive(
      plan, model, kind, [](double) -> std::optional<double> { return std::nullopt; },
      [&](int i) -> std::optional<filter::Observation> {
        if (kind == StrategyKind::open_loop) {
          if (observations.empty()) return std::nullopt;
          return observations.back();
        }
        if (static_cast<std::size_t>(i) < observations.size()) {
          return observations[static_cast<std::size_t>(i)];
        }
        return std::nullopt;
      });
}

const StrategyReport& MonteCarloReport::at(StrategyKind kind) const {
  for (const auto& s : strategies) {
    if (s.kind == kind) return s;
  }
  throw Error(ErrorCode::InvalidPlan, "strategy missing from report");
}

ErrorStats summarize_errors(std::span<const double> values) {
  ErrorStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.p05 = quantile(sorted, 0.05);
  s.p50 = quantile(sorted, 0.50);
  s.p95 = quantile(sorted, 0.95);
  return s;
}

MonteCarloReport monte_carlo(const SimConfig& config) {
  if (config.trials < 1) throw Error(ErrorCode::InvalidPlan, "trials >= 1 violated");
  validate(config.plan, config.assumed());

  const auto trials = static_cast<std::size_t>(config.trials);
  const auto n = static_cast<std::size_t>(config.plan.n);
  constexpr std::size_t kinds = std::size(kAllStrategies);

  // Slot layout: [strategy][trial] for errors, [strategy][trial][step] for densities.
  std::vector<double> errors(kinds * trials);
  std::vector<double> densities(kinds * trials * n);

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      for (std::size_t s = 0; s < kinds; ++s) {
        const auto kind = kAllStrategies[s];
        auto streams = derive_streams(config.seed, kind, static_cast<int>(t), config.paired);
        const auto trace = run_strategy(config, kind, streams);
        errors[s * trials + t] = std::abs(*trace.steps.back().true_stiffness - config.plan.target_k);
        for (std::size_t i = 0; i < n; ++i) {
          densities[(s * trials + t) * n + i] = trace.steps[i].applied_density;
        }
      }
    }
  };

  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, trials);
  if (workers <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      const std::size_t chunk = (trials + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(trials, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
          try {
            run_range(begin, end);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  MonteCarloReport report{.config = config};
  for (std::size_t s = 0; s < kinds; ++s) {
    StrategyReport sr{.kind = kAllStrategies[s]};
    sr.final_abs_error_kg_mm.assign(errors.begin() + static_cast<std::ptrdiff_t>(s * trials),
                                    errors.begin() + static_cast<std::ptrdiff_t>((s + 1) * trials));
    std::vector<double> pct;
    pct.reserve(trials);
    for (double e : sr.final_abs_error_kg_mm) pct.push_back(e / config.plan.target_k * 100.0);
    sr.abs_error_kg_mm = summarize_errors(sr.final_abs_error_kg_mm);
    sr.abs_error_pct = summarize_errors(pct);
    sr.mean_density_per_step.assign(n, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        sr.mean_density_per_step[i] += densities[(s * trials + t) * n + i];
      }
    }
    for (auto& d : sr.mean_density_per_step) d /= static_cast<double>(trials);
    report.strategies.push_back(std::move(sr));
  }
  return report;
}

nlohmann::json to_json(const MonteCarloReport& report) {
  nlohmann::json config{{"plan", report.config.plan},
                        {"model_true", report.config.model_true},
                        {"model_assumed", report.config.assumed()},
                        {"trials", report.config.trials},
                        {"seed", report.config.seed},
                        {"paired", report.config.paired}};
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : report.strategies) {
    strategies.push_back({{"strategy", std::string(to_string(s.kind))},
                          {"abs_error_kg_mm", stats_json(s.abs_error_kg_mm)},
                          {"abs_error_pct", stats_json(s.abs_error_pct)},
                          {"mean_density_per_step", s.mean_density_per_step},
                          {"final_abs_error_kg_mm", s.final_abs_error_kg_mm}});
  }
  return {{"config", config}, {"strategies", strategies}};
}

MonteCarloReport report_from_json(const nlohmann::json& j) {
  try {
    MonteCarloReport report;
    const auto& c = j.at("config");
    report.config.plan = c.at("plan").get<BuildPlan>();
    report.config.model_true = c.at("model_true").get<ProcessModel>();
    report.config.model_assumed = c.at("model_assumed").get<ProcessModel>();
    report.config.trials = c.at("trials").get<int>();
    report.config.seed = c.at("seed").get<std::uint64_t>();
    report.config.paired = c.at("paired").get<bool>();
    for (const auto& s : j.at("strategies")) {
      StrategyReport sr{.kind = strategy_from_string(s.at("strategy").get<std::string>())};
      sr.abs_error_kg_mm = stats_from_json(s.at("abs_error_kg_mm"));
      sr.abs_error_pct = stats_from_json(s.at("abs_error_pct"));
      sr.mean_density_per_step = s.at("mean_density_per_step").get<std::vector<double>>();
      sr.final_abs_error_kg_mm = s.at("final_abs_error_kg_mm").get<std::vector<double>>();
      report.strategies.push_back(std::move(sr));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("Monte Carlo report: ") + e.what());
  }
}

void write_trials_csv(std::ostream& out, const MonteCarloReport& report) {
  out << "strategy,trial,final_error_kg_mm,final_error_pct\n";
  for (const auto& s : report.strategies) {
    for (std::size_t t = 0; t < s.final_abs_error_kg_mm.size(); ++t) {
      const double e = s.final_abs_error_kg_mm[t];
      out << to_string(s.kind) << ',' << t << ',' << io::format_double(e) << ','
          << io::format_double(e / report.config.plan.target_k * 100.0) << '\n';
    }
  }
}

}  // namespace leafctl::simulate
