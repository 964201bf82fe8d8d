#pragma once

// Live print sessions. A session is the fold of an append-only event log
// (one newline-delimited JSON file per session); the in-memory state is never
// persisted on its own, so replaying the log always reproduces it.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "leafctl/calibration.hpp"
#include "leafctl/control.hpp"
#include "leafctl/filter.hpp"
#include "leafctl/model.hpp"

namespace leafctl::session {

enum class Status { awaiting_print, awaiting_measurement, complete };

std::string_view to_string(Status status);

/// What the operator reports after printing a leaf: direct stiffness
/// readings, or raw load/deflection point sets reduced to one reading each.
/// `repetitions`, when set, is the number of raw readings the resulting average
/// stands for (e.g. one value that is already the mean of five readings);
/// otherwise it is the number of readings given.
struct MeasurementInput {
  std::vector<double> values;
  std::vector<std::vector<calibration::BendingPoint>> bending;
  std::optional<int> repetitions;
};

struct HistoryEntry {
  control::ControlDecision decision;  // recommendation shown for this leaf
  double applied_density = 0.0;
  MeasurementInput input;
  std::vector<double> readings;  // stiffness per reading
  filter::Observation observation;
  BeliefState belief_after;
  std::string recorded_at;
};

struct Session {
  std::string id;
  std::int64_t seq = 0;
  std::string created_at;
  BuildPlan plan;
  ProcessModel model;
  BeliefState belief;
  std::vector<HistoryEntry> history;
  std::optional<control::ControlDecision> next_decision;
  std::optional<double> committed_density;  // operator override for the next leaf
  Status status = Status::awaiting_print;

  /// Density the next leaf will be recorded with.
  double next_density() const;
  /// Filtered-strategy trace; the final error uses the last observation.
  BuildTrace trace() const;
  /// |final belief mean - K| / K * 100, once complete.
  std::optional<double> final_belief_error_pct() const;
};

struct Event {
  std::string type;  // created | density_committed | measurement_recorded | completed
  std::string at;    // UTC ISO-8601 timestamp
  nlohmann::json payload;
};

nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Session& session);
nlohmann::json to_json(const MeasurementInput& input);
MeasurementInput measurement_from_json(const nlohmann::json& j);

/// Pure fold of one event onto the state (nullopt before `created`).
Session apply(std::optional<Session> state, const Event& event);
Session replay(std::span<const Event> events);

/// Observation produced by a measurement input (readings averaged).
filter::Observation observation_from(const MeasurementInput& input, std::vector<double>* readings = nullptr);

struct SessionSummary {
  std::string id;
  std::int64_t seq = 0;
  std::string created_at;
  Status status = Status::awaiting_print;
  int n = 0;
  double target_k = 0.0;
  int leaves_done = 0;
};

struct NamedModel {
  std::string name;
  ProcessModel model;
};

/// Event-log store rooted at a data directory:
///   <data-dir>/sessions/<id>.ndjson   one event per line
///   <data-dir>/models/<name>.json     calibrated ProcessModel files
/// Writers to the same session are serialized; every event is flushed and
/// fsync'ed before the call returns.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir);

  Session create(const BuildPlan& plan, const ProcessModel& model,
                 std::optional<std::string> id = std::nullopt);
  Session record_measurement(const std::string& id, const MeasurementInput& input);
  Session override_density(const std::string& id, double density);
  Session get(const std::string& id) const;
  std::vector<SessionSummary> list() const;
  void remove(const std::string& id);
  std::vector<Event> events(const std::string& id) const;

  std::vector<NamedModel> models() const;
  ProcessModel model(const std::string& name) const;

  const std::filesystem::path& data_dir() const { return data_dir_; }

 private:
  std::filesystem::path log_path(const std::string& id) const;
  std::shared_ptr<std::mutex> lock_for(const std::string& id);
  void append(const std::string& id, std::span<const Event> events);

  std::filesystem::path data_dir_;
  std::mutex registry_mutex_;
  std::unordered_map<std::string, std::shared_ptr<std::mutex>> locks_;
};

}  // namespace leafctl::session
