#include "leafctl/cli.hpp"

#include <fmt/core.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "leafctl/calibration.hpp"
#include "leafctl/control.hpp"
#include "leafctl/error.hpp"
#include "leafctl/fixtures.hpp"
#include "leafctl/io.hpp"
#include "leafctl/json.hpp"
#include "leafctl/service.hpp"
#include "leafctl/session.hpp"
#include "leafctl/simulate.hpp"

namespace leafctl::cli {

namespace {

using nlohmann::json;

enum class Format { text, json, csv };

struct Globals {
  std::string data_dir = "leafctl-data";
  std::uint64_t seed = 1;
  Format format = Format::text;
};

struct PlanFlags {
  std::string model_path;
  int n = 0;
  double target_k = 0.0;
  int repetitions = 5;
  double d_min = 0.0;
  double d_max = 100.0;

  BuildPlan plan() const {
    return BuildPlan{.n = n, .target_k = target_k, .repetitions = repetitions, .d_min = d_min, .d_max = d_max};
  }
};

void add_plan_flags(CLI::App* cmd, PlanFlags& f, bool required) {
  auto* model = cmd->add_option("--model", f.model_path, "ProcessModel JSON file");
  auto* n = cmd->add_option("--n", f.n, "number of leaves");
  auto* k = cmd->add_option("--k", f.target_k, "target stiffness (kg/mm)");
  if (required) {
    model->required();
    n->required();
    k->required();
  }
  cmd->add_option("--reps", f.repetitions, "readings averaged per observation")->capture_default_str();
  cmd->add_option("--d-min", f.d_min, "minimum density (%)")->capture_default_str();
  cmd->add_option("--d-max", f.d_max, "maximum density (%)")->capture_default_str();
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPlan:
    case ErrorCode::InfeasibleTarget:
    case ErrorCode::ZeroAlpha:
    case ErrorCode::NoLeavesRemaining:
    case ErrorCode::LengthMismatch: return kConfigError;
    case ErrorCode::IoError: return kRuntimeError;
    default: return kDataError;
  }
}

// --- calibrate -------------------------------------------------------------

int cmd_calibrate(const Globals& g, const std::string& input, const std::string& output,
                  std::ostream& out) {
  const auto model = calibration::calibrate(io::load_calibration_csv(input));
  if (!output.empty()) io::save_model(output, model);
  switch (g.format) {
    case Format::json: out << json(model).dump(2) << '\n'; break;
    case Format::csv:
      out << "alpha,beta,sigma_p,sigma_o\n"
          << io::format_double(model.alpha) << ',' << io::format_double(model.beta) << ','
          << io::format_double(model.sigma_p) << ',' << io::format_double(model.sigma_o) << '\n';
      break;
    case Format::text:
      fmt::print(out, "alpha   = {:.4f} kg/mm per %\n", model.alpha);
      fmt::print(out, "beta    = {:.4f} kg/mm\n", model.beta);
      fmt::print(out, "sigma_p = {:.4f} kg/mm\n", model.sigma_p);
      fmt::print(out, "sigma_o = {:.4f} kg/mm\n", model.sigma_o);
      break;
  }
  return kOk;
}

// --- plan ------------------------------------------------------------------

int cmd_plan(const Globals& g, const PlanFlags& f, double mean, int step, std::ostream& out) {
  const auto model = io::load_model(f.model_path);
  const auto plan = f.plan();
  validate(plan, model);
  const double open_loop = open_loop_density(plan, model);
  const auto decision = control::optimal_density(plan, model, mean, step);
  const int remaining = plan.n - step;
  const double per_leaf = control::allocate_equal_split(plan.target_k, mean, remaining);

  if (g.format == Format::json) {
    json rows = json::array();
    for (int j = step + 1; j <= plan.n; ++j) {
      rows.push_back({{"leaf", j}, {"mean_stiffness", per_leaf}, {"density", decision.unclamped_density}});
    }
    out << json{{"plan", plan},
                {"model", model},
                {"open_loop_density", open_loop},
                {"belief_mean", mean},
                {"step", step},
                {"decision", decision},
                {"allocation", rows}}
               .dump(2)
        << '\n';
    return kOk;
  }
  if (g.format == Format::csv) {
    out << "leaf,mean_stiffness_kg_per_mm,density_pct,recommended_density_pct,clamped\n";
    for (int j = step + 1; j <= plan.n; ++j) {
      out << j << ',' << io::format_double(per_leaf) << ',' << io::format_double(decision.unclamped_density)
          << ',' << io::format_double(decision.recommended_density) << ','
          << (decision.clamped ? "true" : "false") << '\n';
    }
    return kOk;
  }
  fmt::print(out, "plan: n = {}, K = {} kg/mm, bounds [{}, {}] %\n", plan.n, plan.target_k, plan.d_min,
             plan.d_max);
  fmt::print(out, "open-loop density: {:.3f} %\n", open_loop);
  fmt::print(out, "from belief mean {:.4f} kg/mm after {} leaves:\n", mean, step);
  fmt::print(out, "  {:>4}  {:>22}  {:>12}\n", "leaf", "mean stiffness (kg/mm)", "density (%)");
  for (int j = step + 1; j <= plan.n; ++j) {
    fmt::print(out, "  {:>4}  {:>22.4f}  {:>12.3f}\n", j, per_leaf, decision.unclamped_density);
  }
  fmt::print(out, "next density: {:.3f} %{}\n", decision.recommended_density,
             decision.clamped ? fmt::format(" (clamped from {:.3f} %)", decision.unclamped_density) : "");
  fmt::print(out, "predicted final stiffness: {:.4f} +/- {:.4f} kg/mm\n", decision.predicted_final_mean,
             decision.predicted_final_sd);
  return kOk;
}

// --- simulate --------------------------------------------------------------

void print_mc_table(const simulate::MonteCarloReport& report, std::ostream& out) {
  const auto& c = report.config;
  fmt::print(out, "Monte Carlo: n = {}, K = {} kg/mm, r = {}, trials = {}, seed = {}{}\n", c.plan.n,
             c.plan.target_k, c.plan.repetitions, c.trials, c.seed, c.paired ? ", paired" : "");
  fmt::print(out, "{:<12} {:>14} {:>10} {:>10} {:>10} {:>10}   {}\n", "strategy", "mean|err|kg/mm",
             "mean|err|%", "sd kg/mm", "p50 kg/mm", "p95 kg/mm", "mean density per leaf (%)");
  for (const auto& s : report.strategies) {
    std::string densities;
    for (double d : s.mean_density_per_step) densities += fmt::format("{:8.3f}", d);
    fmt::print(out, "{:<12} {:>14.4f} {:>10.3f} {:>10.4f} {:>10.4f} {:>10.4f}   {}\n", to_string(s.kind),
               s.abs_error_kg_mm.mean, s.abs_error_pct.mean, s.abs_error_kg_mm.sd, s.abs_error_kg_mm.p50,
               s.abs_error_kg_mm.p95, densities);
  }
}

int cmd_simulate(const Globals& g, const PlanFlags& f, const std::string& assumed_path, int trials,
                 bool paired, int threads, const std::string& out_path, const std::string& csv_path,
                 std::ostream& out) {
  simulate::SimConfig config{.plan = f.plan(),
                             .model_true = io::load_model(f.model_path),
                             .trials = trials,
                             .seed = g.seed,
                             .paired = paired,
                             .threads = threads};
  if (!assumed_path.empty()) config.model_assumed = io::load_model(assumed_path);
  const auto report = simulate::monte_carlo(config);
  const auto report_json = simulate::to_json(report);
  if (!out_path.empty()) io::write_file(out_path, report_json.dump(2) + "\n");
  if (!csv_path.empty()) {
    std::ostringstream csv;
    simulate::write_trials_csv(csv, report);
    io::write_file(csv_path, csv.str());
  }
  switch (g.format) {
    case Format::json: out << report_json.dump(2) << '\n'; break;
    case Format::csv: simulate::write_trials_csv(out, report); break;
    case Format::text: print_mc_table(report, out); break;
  }
  return kOk;
}

// --- report ----------------------------------------------------------------

void print_trace_text(const BuildTrace& t, std::ostream& out) {
  fmt::print(out, "strategy: {}   target: {} kg/mm\n", to_string(t.strategy), t.target_k);
  fmt::print(out, "{:>4}  {:>10}  {:>12}  {:>14}  {:>12}  {:>10}\n", "leaf", "density %", "true kg/mm",
             "observed kg/mm", "belief mean", "belief sd");
  const auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : std::string("-"); };
  for (const auto& s : t.steps) {
    fmt::print(out, "{:>4}  {:>10.3f}  {:>12}  {:>14}  {:>12.4f}  {:>10.4f}\n", s.belief_after.step,
               s.applied_density, cell(s.true_stiffness), cell(s.observed_stiffness), s.belief_after.mean,
               std::sqrt(s.belief_after.variance));
  }
  if (t.final_abs_error_pct) fmt::print(out, "final absolute error: {:.2f} %\n", *t.final_abs_error_pct);
}

int cmd_report(const Globals& g, const std::string& path, std::ostream& out) {
  const auto text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (doc.contains("strategies")) {
    const auto report = simulate::report_from_json(doc);
    switch (g.format) {
      case Format::json: out << simulate::to_json(report).dump(2) << '\n'; break;
      case Format::csv: simulate::write_trials_csv(out, report); break;
      case Format::text: print_mc_table(report, out); break;
    }
    return kOk;
  }
  // A session document carries its trace under "trace".
  const auto& trace_json = doc.contains("trace") ? doc.at("trace") : doc;
  const auto trace = parse_json_as<BuildTrace>(trace_json.dump(), path.c_str());
  switch (g.format) {
    case Format::json: out << json(trace).dump(2) << '\n'; break;
    case Format::csv: io::write_trace_csv(out, trace); break;
    case Format::text: print_trace_text(trace, out); break;
  }
  return kOk;
}

// --- operate ---------------------------------------------------------------

void print_session_state(const session::Session& s, std::ostream& out) {
  if (!s.history.empty()) {
    const auto& h = s.history.back();
    fmt::print(out, "leaf {}: observed {:.4f} kg/mm (r = {}), belief {:.4f} +/- {:.4f} kg/mm\n",
               s.history.size(), h.observation.value, h.observation.repetitions, h.belief_after.mean,
               std::sqrt(h.belief_after.variance));
  }
  if (s.status == session::Status::complete) {
    const auto trace = s.trace();
    fmt::print(out, "session {} complete: final observed stiffness {:.4f} kg/mm, target {} kg/mm\n", s.id,
               *trace.steps.back().observed_stiffness, s.plan.target_k);
    fmt::print(out, "final absolute error: {:.2f} % (observed), {:.2f} % (filtered estimate)\n",
               *trace.final_abs_error_pct, *s.final_belief_error_pct());
    return;
  }
  const auto& d = *s.next_decision;
  fmt::print(out, "leaf {}/{}: print at {:.3f} %{}\n", s.history.size() + 1, s.plan.n, s.next_density(),
             s.committed_density ? " (operator override)"
             : d.clamped         ? fmt::format(" (clamped from {:.3f} %)", d.unclamped_density)
                                 : "");
  fmt::print(out, "  predicted final stiffness {:.4f} +/- {:.4f} kg/mm\n", d.predicted_final_mean,
             d.predicted_final_sd);
}

int cmd_operate(const Globals& g, const PlanFlags& f, const std::string& session_id, bool pre_averaged,
                std::istream& in, std::ostream& out, std::ostream& err) {
  session::SessionStore store(g.data_dir);
  session::Session s;
  bool resumed = false;
  if (!session_id.empty()) {
    try {
      s = store.get(session_id);
      resumed = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnknownSession) throw;
    }
  }
  if (!resumed) {
    if (f.model_path.empty() || f.n == 0 || f.target_k == 0.0) {
      throw Error(ErrorCode::InvalidPlan, "--model, --n and --k are required to start a session");
    }
    s = store.create(f.plan(), io::load_model(f.model_path),
                     session_id.empty() ? std::nullopt : std::optional(session_id));
  }
  fmt::print(out, "{} session {} (n = {}, K = {} kg/mm)\n", resumed ? "resumed" : "started", s.id, s.plan.n,
             s.plan.target_k);
  if (s.status != session::Status::complete) print_session_state(s, out);

  std::string line;
  while (s.status != session::Status::complete) {
    out << "readings for leaf " << s.history.size() + 1 << " (kg/mm), 'o <density>' to override, 'q' to quit> "
        << std::flush;
    if (!std::getline(in, line) || line == "q" || line == "quit") {
      fmt::print(out, "\nsession {} saved; resume with --session {}\n", s.id, s.id);
      break;
    }
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first)) continue;
    try {
      if (first == "o") {
        std::string value;
        if (!(tokens >> value)) throw Error(ErrorCode::ParseError, "expected a density after 'o'");
        s = store.override_density(s.id, io::parse_double(value, "density"));
      } else {
        session::MeasurementInput input;
        input.values.push_back(io::parse_double(first, "reading"));
        for (std::string tok; tokens >> tok;) input.values.push_back(io::parse_double(tok, "reading"));
        if (pre_averaged) input.repetitions = s.plan.repetitions;
        s = store.record_measurement(s.id, input);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      fmt::print(err, "{}; try again\n", e.detail());
      continue;
    }
    print_session_state(s, out);
  }
  if (g.format == Format::json) out << session::to_json(s).dump(2) << '\n';
  if (g.format == Format::csv) io::write_trace_csv(out, s.trace());
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop infill-density control for sequentially printed leaf springs", "leafctl"};
  app.require_subcommand(1);
  app.allow_extras(false);

  Globals g;
  std::string format = "text";
  app.add_option("--data-dir", g.data_dir, "session and model directory")
      ->envname("LEAFCTL_DATA_DIR")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();

  std::string cal_input;
  std::string cal_output;
  auto* calibrate = app.add_subcommand("calibrate", "fit a ProcessModel from bending-test CSV data");
  calibrate->add_option("--input", cal_input, "calibration CSV")->required();
  calibrate->add_option("--output", cal_output, "write the model JSON here");

  PlanFlags plan_flags;
  double plan_mean = 0.0;
  int plan_step = 0;
  auto* plan = app.add_subcommand("plan", "density plan for a build");
  add_plan_flags(plan, plan_flags, true);
  plan->add_option("--mean", plan_mean, "current belief mean (kg/mm)")->capture_default_str();
  plan->add_option("--step", plan_step, "leaves already printed")->capture_default_str();

  PlanFlags sim_flags;
  std::string assumed;
  int trials = 1000;
  bool paired = false;
  int threads = 0;
  std::string sim_out;
  std::string sim_csv;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo comparison of the three strategies");
  add_plan_flags(sim, sim_flags, true);
  sim->add_option("--assumed-model", assumed, "model used by the controller (default: --model)");
  sim->add_option("--trials", trials, "trials per strategy")->capture_default_str();
  sim->add_flag("--paired", paired, "share noise draws across strategies");
  sim->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  sim->add_option("--out", sim_out, "write the report JSON here");
  sim->add_option("--csv", sim_csv, "write per-trial errors CSV here");

  PlanFlags op_flags;
  std::string session_id;
  bool pre_averaged = false;
  auto* operate = app.add_subcommand("operate", "interactive print session on the terminal");
  add_plan_flags(operate, op_flags, false);
  operate->add_option("--session", session_id, "session id to resume or create");
  operate->add_flag("--pre-averaged", pre_averaged,
                    "each entered value is already the mean of --reps readings");

  service::ServeOptions serve_opts;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "run the local session service");
  serve->add_option("--port", serve_opts.port, "TCP port")->envname("LEAFCTL_PORT")->capture_default_str();
  serve->add_option("--host", serve_opts.host, "bind address")->envname("LEAFCTL_HOST")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "directory served at / (operator console)");

  std::string trace_path;
  auto* report = app.add_subcommand("report", "render a trace, session or Monte Carlo report");
  report->add_option("--trace", trace_path, "BuildTrace, session or report JSON")->required();

  std::string fixture_dir;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "regenerate the reference fixture files");
  fixtures_cmd->add_option("--out-dir", fixture_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  g.format = format == "json" ? Format::json : format == "csv" ? Format::csv : Format::text;

  try {
    if (*calibrate) return cmd_calibrate(g, cal_input, cal_output, out);
    if (*plan) return cmd_plan(g, plan_flags, plan_mean, plan_step, out);
    if (*sim) return cmd_simulate(g, sim_flags, assumed, trials, paired, threads, sim_out, sim_csv, out);
    if (*operate) return cmd_operate(g, op_flags, session_id, pre_averaged, in, out, err);
    if (*report) return cmd_report(g, trace_path, out);
    if (*fixtures_cmd) {
      fixtures::write_fixture_files(fixture_dir);
      fmt::print(out, "fixtures written to {}\n", fixture_dir);
      return kOk;
    }
    if (*serve) {
      serve_opts.data_dir = g.data_dir;
      if (!static_dir.empty()) serve_opts.static_dir = static_dir;
      fmt::print(out, "serving {} on http://{}:{}\n", serve_opts.data_dir.string(), serve_opts.host,
                 serve_opts.port);
      out.flush();
      service::serve(serve_opts);
      return kOk;
    }
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace leafctl::cli
