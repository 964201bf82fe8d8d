#include "leafctl/json.hpp"

#include <string>

#include "leafctl/error.hpp"

namespace leafctl {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(json& j, const ProcessModel& m) {
  j = json{{"alpha", m.alpha}, {"beta", m.beta}, {"sigma_p", m.sigma_p}, {"sigma_o", m.sigma_o}};
}

void from_json(const json& j, ProcessModel& m) {
  j.at("alpha").get_to(m.alpha);
  j.at("beta").get_to(m.beta);
  j.at("sigma_p").get_to(m.sigma_p);
  j.at("sigma_o").get_to(m.sigma_o);
}

void to_json(json& j, const BuildPlan& p) {
  j = json{{"n", p.n},
           {"target_k", p.target_k},
           {"repetitions", p.repetitions},
           {"d_min", p.d_min},
           {"d_max", p.d_max}};
  put_optional(j, "density_increment", p.density_increment);
}

void from_json(const json& j, BuildPlan& p) {
  p = BuildPlan{};
  j.at("n").get_to(p.n);
  j.at("target_k").get_to(p.target_k);
  p.repetitions = j.value("repetitions", 5);
  p.d_min = j.value("d_min", 0.0);
  p.d_max = j.value("d_max", 100.0);
  p.density_increment = get_optional<double>(j, "density_increment");
}

void to_json(json& j, const BeliefState& b) {
  j = json{{"step", b.step}, {"mean", b.mean}, {"variance", b.variance}};
}

void from_json(const json& j, BeliefState& b) {
  j.at("step").get_to(b.step);
  j.at("mean").get_to(b.mean);
  j.at("variance").get_to(b.variance);
}

void to_json(json& j, const StepRecord& s) {
  j = json{{"applied_density", s.applied_density}};
  put_optional(j, "true_stiffness", s.true_stiffness);
  put_optional(j, "observed_stiffness", s.observed_stiffness);
  j["belief_after"] = s.belief_after;
}

void from_json(const json& j, StepRecord& s) {
  j.at("applied_density").get_to(s.applied_density);
  s.true_stiffness = get_optional<double>(j, "true_stiffness");
  s.observed_stiffness = get_optional<double>(j, "observed_stiffness");
  j.at("belief_after").get_to(s.belief_after);
}

void to_json(json& j, const BuildTrace& t) {
  j = json{{"strategy", std::string(to_string(t.strategy))},
           {"target_k", t.target_k},
           {"steps", t.steps}};
  put_optional(j, "final_abs_error_pct", t.final_abs_error_pct);
}

void from_json(const json& j, BuildTrace& t) {
  t.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  j.at("target_k").get_to(t.target_k);
  j.at("steps").get_to(t.steps);
  t.final_abs_error_pct = get_optional<double>(j, "final_abs_error_pct");
}

namespace filter {

void to_json(json& j, const Observation& o) {
  j = json{{"value", o.value}, {"repetitions", o.repetitions}};
}

void from_json(const json& j, Observation& o) {
  j.at("value").get_to(o.value);
  o.repetitions = j.value("repetitions", 1);
}

}  // namespace filter

namespace control {

void to_json(json& j, const ControlDecision& d) {
  j = json{{"recommended_density", d.recommended_density},
           {"clamped", d.clamped},
           {"unclamped_density", d.unclamped_density},
           {"predicted_final_mean", d.predicted_final_mean},
           {"predicted_final_sd", d.predicted_final_sd}};
}

void from_json(const json& j, ControlDecision& d) {
  j.at("recommended_density").get_to(d.recommended_density);
  j.at("clamped").get_to(d.clamped);
  j.at("unclamped_density").get_to(d.unclamped_density);
  j.at("predicted_final_mean").get_to(d.predicted_final_mean);
  j.at("predicted_final_sd").get_to(d.predicted_final_sd);
}

}  // namespace control

template <typename T>
T parse_json_as(const std::string& text, const char* what) {
  try {
    return json::parse(text).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

template ProcessModel parse_json_as<ProcessModel>(const std::string&, const char*);
template BuildPlan parse_json_as<BuildPlan>(const std::string&, const char*);
template BuildTrace parse_json_as<BuildTrace>(const std::string&, const char*);

}  // namespace leafctl
