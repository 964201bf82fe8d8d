#pragma once

// Seeded simulation of the sequential print process and Monte Carlo
// comparison of the three control strategies.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "leafctl/filter.hpp"
#include "leafctl/model.hpp"
#include "leafctl/random.hpp"

namespace leafctl::simulate {

struct SimConfig {
  BuildPlan plan;
  ProcessModel model_true;
  // Model the controller believes in; defaults to model_true.
  std::optional<ProcessModel> model_assumed;
  int trials = 1;
  std::uint64_t seed = 0;
  // Share noise streams across strategies within a trial.
  bool paired = false;
  // Worker threads; 0 picks the hardware concurrency. Never affects results.
  int threads = 0;

  const ProcessModel& assumed() const { return model_assumed ? *model_assumed : model_true; }
};

/// Independent streams for the print (process) noise and the measurement
/// noise of one trial.
struct TrialStreams {
  CounterRng process;
  CounterRng observation;
};

/// Streams for (seed, strategy, trial). In paired mode the strategy is left
/// out of the derivation, so every strategy sees the same noise draws.
TrialStreams derive_streams(std::uint64_t seed, StrategyKind kind, int trial, bool paired);

/// Stack stiffness after adding one leaf printed at `density`.
double print_leaf(double stack_k, const ProcessModel& model, double density, CounterRng& rng);

/// Average of `repetitions` noisy readings of the stack.
filter::Observation measure_stack(double stack_k, const ProcessModel& model, int repetitions,
                                  CounterRng& rng);

/// One simulated build. Filtered: re-plan from the filter posterior after
/// every leaf. Unfiltered: re-plan from the raw observation. Open loop: the
/// same pre-computed density for every leaf and one measurement at the end.
/// The final error uses the true stiffness.
BuildTrace run_strategy(const SimConfig& config, StrategyKind kind, TrialStreams& streams);

/// Re-runs a strategy's decision logic on recorded observations instead of
/// simulated ones. Closed-loop strategies consume observations[i] after leaf
/// i + 1 and need at least n - 1 of them; open loop only uses the last entry,
/// as its final measurement. Final error uses the last observation.
BuildTrace replay_strategy(const BuildPlan& plan, const ProcessModel& model, StrategyKind kind,
                           std::span<const filter::Observation> observations);

struct ErrorStats {
  double mean = 0.0;
  double sd = 0.0;
  double p05 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
};

struct StrategyReport {
  StrategyKind kind = StrategyKind::filtered;
  ErrorStats abs_error_kg_mm;
  ErrorStats abs_error_pct;
  std::vector<double> mean_density_per_step;
  std::vector<double> final_abs_error_kg_mm;  // one per trial
};

struct MonteCarloReport {
  SimConfig config;
  std::vector<StrategyReport> strategies;  // filtered, unfiltered, open_loop

  const StrategyReport& at(StrategyKind kind) const;
};

/// Runs every strategy `trials` times on per-trial streams. Trials run on
/// worker threads into pre-allocated slots and are aggregated in index order,
/// so the report does not depend on the thread count.
MonteCarloReport monte_carlo(const SimConfig& config);

ErrorStats summarize_errors(std::span<const double> values);

nlohmann::json to_json(const MonteCarloReport& report);
MonteCarloReport report_from_json(const nlohmann::json& j);
/// Flat per-trial CSV: strategy,trial,final_error_kg_mm,final_error_pct
void write_trials_csv(std::ostream& out, const MonteCarloReport& report);

}  // namespace leafctl::simulate
