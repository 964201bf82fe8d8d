#include "leafctl/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <random>
#include <sstream>
#include <tuple>

#include "leafctl/error.hpp"
#include "leafctl/io.hpp"
#include "leafctl/json.hpp"

namespace leafctl::session {

using nlohmann::json;

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

std::string random_id() {
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  char buf[24];
  std::snprintf(buf, sizeof buf, "s%012llx",
                static_cast<unsigned long long>(v & 0xFFFFFFFFFFFFULL));
  return buf;
}

Event make_event(std::string type, json payload) {
  return Event{std::move(type), now_iso8601(), std::move(payload)};
}

void write_all(int fd, const std::string& text, const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < text.size()) {
    const auto n = ::write(fd, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::IoError, "write to " + path.string() + " failed: " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

void fsync_dir(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

control::ControlDecision decide(const Session& s) {
  return control::optimal_density(s.plan, s.model, s.belief);
}

}  // namespace

std::string_view to_string(Status status) {
  switch (status) {
    case Status::awaiting_print: return "awaiting_print";
    case Status::awaiting_measurement: return "awaiting_measurement";
    case Status::complete: return "complete";
  }
  return "awaiting_print";
}

double Session::next_density() const {
  if (committed_density) return *committed_density;
  if (next_decision) return next_decision->recommended_density;
  throw Error(ErrorCode::SessionComplete, "session '" + id + "' is complete");
}

BuildTrace Session::trace() const {
  BuildTrace t{.strategy = StrategyKind::filtered, .target_k = plan.target_k};
  for (const auto& h : history) {
    t.steps.push_back(StepRecord{.applied_density = h.applied_density,
                                 .observed_stiffness = h.observation.value,
                                 .belief_after = h.belief_after});
  }
  if (status == Status::complete) finalize_trace(t);
  return t;
}

std::optional<double> Session::final_belief_error_pct() const {
  if (status != Status::complete) return std::nullopt;
  return std::abs(belief.mean - plan.target_k) / plan.target_k * 100.0;
}

filter::Observation observation_from(const MeasurementInput& input, std::vector<double>* readings) {
  std::vector<double> r;
  for (double v : input.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::EmptyMeasurement, "readings must be finite");
    r.push_back(v);
  }
  for (const auto& pts : input.bending) r.push_back(calibration::stiffness_from_bending(pts));
  if (r.empty()) throw Error(ErrorCode::EmptyMeasurement, "no readings given");
  const int reps = input.repetitions.value_or(static_cast<int>(r.size()));
  if (reps < 1) throw Error(ErrorCode::EmptyMeasurement, "repetitions must be >= 1");
  double sum = 0.0;
  for (double v : r) sum += v;
  filter::Observation obs{sum / static_cast<double>(r.size()), reps};
  if (readings) *readings = std::move(r);
  return obs;
}

json to_json(const MeasurementInput& input) {
  json j = json::object();
  if (!input.values.empty()) j["values"] = input.values;
  if (!input.bending.empty()) {
    json sets = json::array();
    for (const auto& pts : input.bending) {
      json arr = json::array();
      for (const auto& p : pts) arr.push_back({{"deflection_mm", p.deflection_mm}, {"load_kg", p.load_kg}});
      sets.push_back(arr);
    }
    j["bending"] = sets;
  }
  if (input.repetitions) j["repetitions"] = *input.repetitions;
  return j;
}

MeasurementInput measurement_from_json(const json& j) {
  try {
    MeasurementInput m;
    if (j.contains("values")) m.values = j.at("values").get<std::vector<double>>();
    if (j.contains("bending")) {
      for (const auto& set : j.at("bending")) {
        std::vector<calibration::BendingPoint> pts;
        for (const auto& p : set) {
          pts.push_back({p.at("deflection_mm").get<double>(), p.at("load_kg").get<double>()});
        }
        m.bending.push_back(std::move(pts));
      }
    }
    if (j.contains("repetitions") && !j.at("repetitions").is_null()) {
      m.repetitions = j.at("repetitions").get<int>();
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("measurement: ") + e.what());
  }
}

json to_json(const Event& event) {
  return json{{"type", event.type}, {"at", event.at}, {"payload", event.payload}};
}

Event event_from_json(const json& j) {
  try {
    return Event{j.at("type").get<std::string>(), j.at("at").get<std::string>(), j.at("payload")};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("event: ") + e.what());
  }
}

json to_json(const Session& s) {
  json history = json::array();
  for (std::size_t i = 0; i < s.history.size(); ++i) {
    const auto& h = s.history[i];
    history.push_back({{"step", i + 1},
                       {"decision", h.decision},
                       {"applied_density", h.applied_density},
                       {"input", to_json(h.input)},
                       {"readings", h.readings},
                       {"observation", h.observation},
                       {"belief_after", h.belief_after},
                       {"recorded_at", h.recorded_at}});
  }
  const auto trace = s.trace();
  json j{{"id", s.id},
         {"seq", s.seq},
         {"created_at", s.created_at},
         {"status", std::string(to_string(s.status))},
         {"plan", s.plan},
         {"model", s.model},
         {"belief", s.belief},
         {"history", history},
         {"trace", trace}};
  j["next_decision"] = s.next_decision ? json(*s.next_decision) : json(nullptr);
  j["committed_density"] = s.committed_density ? json(*s.committed_density) : json(nullptr);
  j["next_density"] = s.status == Status::complete ? json(nullptr) : json(s.next_density());
  j["final_abs_error_pct"] = trace.final_abs_error_pct ? json(*trace.final_abs_error_pct) : json(nullptr);
  const auto belief_err = s.final_belief_error_pct();
  j["final_belief_error_pct"] = belief_err ? json(*belief_err) : json(nullptr);
  return j;
}

Session apply(std::optional<Session> state, const Event& event) {
  try {
    if (event.type == "created") {
      if (state) throw Error(ErrorCode::ParseError, "duplicate created event");
      Session s;
      s.id = event.payload.at("id").get<std::string>();
      s.seq = event.payload.at("seq").get<std::int64_t>();
      s.created_at = event.at;
      s.plan = event.payload.at("plan").get<BuildPlan>();
      s.model = event.payload.at("model").get<ProcessModel>();
      validate(s.plan, s.model);
      s.next_decision = decide(s);
      return s;
    }
    if (!state) throw Error(ErrorCode::ParseError, "event '" + event.type + "' before created");
    Session s = std::move(*state);

    if (event.type == "density_committed") {
      if (s.status == Status::complete) throw Error(ErrorCode::SessionComplete, "session is complete");
      s.committed_density = event.payload.at("density").get<double>();
      s.status = Status::awaiting_measurement;
      return s;
    }
    if (event.type == "measurement_recorded") {
      if (s.status == Status::complete) throw Error(ErrorCode::SessionComplete, "session is complete");
      HistoryEntry h;
      h.decision = *s.next_decision;
      h.applied_density = event.payload.at("applied_density").get<double>();
      h.input = measurement_from_json(event.payload.at("input"));
      h.observation = observation_from(h.input, &h.readings);
      h.belief_after = filter::assimilate(s.belief, s.model, h.applied_density, h.observation);
      h.recorded_at = event.at;
      s.belief = h.belief_after;
      s.history.push_back(std::move(h));
      s.committed_density.reset();
      if (static_cast<int>(s.history.size()) == s.plan.n) {
        s.status = Status::complete;
        s.next_decision.reset();
      } else {
        s.status = Status::awaiting_print;
        s.next_decision = decide(s);
      }
      return s;
    }
    if (event.type == "completed") {
      if (s.status != Status::complete) {
        throw Error(ErrorCode::ParseError, "completed event before the last measurement");
      }
      return s;
    }
    throw Error(ErrorCode::ParseError, "unknown event type '" + event.type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "event '" + event.type + "': " + e.what());
  }
}

Session replay(std::span<const Event> events) {
  std::optional<Session> state;
  for (const auto& e : events) state = session::apply(std::move(state), e);
  if (!state) throw Error(ErrorCode::UnknownSession, "empty event log");
  return *state;
}

SessionStore::SessionStore(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(data_dir_ / "sessions", ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot create " + (data_dir_ / "sessions").string() + ": " + ec.message());
  }
}

std::filesystem::path SessionStore::log_path(const std::string& id) const {
  if (!valid_id(id)) throw Error(ErrorCode::UnknownSession, "invalid session id '" + id + "'");
  return data_dir_ / "sessions" / (id + ".ndjson");
}

std::shared_ptr<std::mutex> SessionStore::lock_for(const std::string& id) {
  std::lock_guard guard(registry_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

void SessionStore::append(const std::string& id, std::span<const Event> events) {
  const auto path = log_path(id);
  std::string text;
  for (const auto& e : events) text += to_json(e).dump() + "\n";
  // Drop the tail of an interrupted write so the new events start on a line
  // of their own.
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    const auto existing = io::read_file(path);
    if (!existing.empty() && existing.back() != '\n') {
      const auto keep = existing.rfind('\n');
      std::filesystem::resize_file(path, keep == std::string::npos ? 0 : keep + 1, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot truncate " + path.string() + ": " + ec.message());
    }
  }
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) throw Error(ErrorCode::IoError, "cannot open " + path.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, text, path);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw Error(ErrorCode::IoError, "fsync failed for " + path.string());
  }
  ::close(fd);
}

std::vector<Event> SessionStore::events(const std::string& id) const {
  const auto path = log_path(id);
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  const auto text = io::read_file(path);
  std::vector<Event> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    // A line without its newline is a write that never completed; it was
    // never acknowledged, so it is dropped.
    if (end == std::string::npos) break;
    const auto line = std::string_view(text).substr(start, end - start);
    if (!line.empty()) {
      try {
        out.push_back(event_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
      }
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return out;
}

Session SessionStore::create(const BuildPlan& plan, const ProcessModel& model,
                             std::optional<std::string> id) {
  validate(plan, model);
  std::lock_guard create_guard(registry_mutex_);
  std::string sid = id ? *id : random_id();
  if (!valid_id(sid)) throw Error(ErrorCode::InvalidPlan, "session id must match [A-Za-z0-9_-]{1,64}");
  const auto path = data_dir_ / "sessions" / (sid + ".ndjson");
  if (std::filesystem::exists(path)) {
    if (id) throw Error(ErrorCode::InvalidPlan, "session '" + sid + "' already exists");
    sid = random_id();
  }
  std::int64_t seq = 0;
  for (const auto& s : list()) seq = std::max(seq, s.seq);

  const auto event = make_event("created", json{{"id", sid}, {"seq", seq + 1}, {"plan", plan}, {"model", model}});
  const auto session = session::apply(std::nullopt, event);
  append(sid, std::span(&event, 1));
  fsync_dir(data_dir_ / "sessions");
  return session;
}

Session SessionStore::record_measurement(const std::string& id, const MeasurementInput& input) {
  const auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  const auto log = events(id);
  auto state = replay(log);
  if (state.status == Status::complete) {
    throw Error(ErrorCode::SessionComplete, "session '" + id + "' is complete");
  }
  std::vector<Event> pending{make_event(
      "measurement_recorded", json{{"applied_density", state.next_density()}, {"input", to_json(input)}})};
  auto next = session::apply(std::move(state), pending.front());
  if (next.status == Status::complete) {
    pending.push_back(make_event("completed", json{{"final_belief_mean", next.belief.mean}}));
  }
  append(id, pending);
  return next;
}

Session SessionStore::override_density(const std::string& id, double density) {
  const auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto state = replay(events(id));
  if (state.status == Status::complete) {
    throw Error(ErrorCode::SessionComplete, "session '" + id + "' is complete");
  }
  if (!std::isfinite(density) || density < state.plan.d_min || density > state.plan.d_max) {
    throw Error(ErrorCode::InvalidPlan, "override density must lie within the plan bounds");
  }
  const auto event = make_event("density_committed",
                                json{{"density", density},
                                     {"recommended", state.next_decision->recommended_density}});
  auto next = session::apply(std::move(state), event);
  append(id, std::span(&event, 1));
  return next;
}

Session SessionStore::get(const std::string& id) const { return replay(events(id)); }

std::vector<SessionSummary> SessionStore::list() const {
  std::vector<SessionSummary> out;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir_ / "sessions")) {
    if (entry.path().extension() != ".ndjson") continue;
    const auto id = entry.path().stem().string();
    if (!valid_id(id)) continue;
    Session s;
    try {
      s = get(id);
    } catch (const Error&) {
      continue;
    }
    out.push_back({s.id, s.seq, s.created_at, s.status, s.plan.n, s.plan.target_k,
                   static_cast<int>(s.history.size())});
  }
  std::sort(out.begin(), out.end(), [](const SessionSummary& a, const SessionSummary& b) {
    return std::tie(a.seq, a.id) < std::tie(b.seq, b.id);
  });
  return out;
}

void SessionStore::remove(const std::string& id) {
  const auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  const auto path = log_path(id);
  if (!std::filesystem::remove(path)) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  fsync_dir(data_dir_ / "sessions");
}

std::vector<NamedModel> SessionStore::models() const {
  std::vector<NamedModel> out;
  const auto dir = data_dir_ / "models";
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    try {
      out.push_back({entry.path().stem().string(), io::load_model(entry.path())});
    } catch (const Error&) {
      // Not a model file.
    }
  }
  std::sort(out.begin(), out.end(), [](const NamedModel& a, const NamedModel& b) { return a.name < b.name; });
  return out;
}

ProcessModel SessionStore::model(const std::string& name) const {
  if (!valid_id(name)) throw Error(ErrorCode::InvalidPlan, "invalid model name '" + name + "'");
  const auto path = data_dir_ / "models" / (name + ".json");
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::InvalidPlan, "no model named '" + name + "'");
  return io::load_model(path);
}

}  // namespace leafctl::session
