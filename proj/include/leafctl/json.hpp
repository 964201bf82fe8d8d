#pragma once

// JSON encodings of the domain types (nlohmann ADL hooks). Field names and
// shapes are documented in docs/formats.md.

#include <json.hpp>

#include "leafctl/control.hpp"
#include "leafctl/filter.hpp"
#include "leafctl/model.hpp"

namespace leafctl {

void to_json(nlohmann::json& j, const ProcessModel& m);
void from_json(const nlohmann::json& j, ProcessModel& m);
void to_json(nlohmann::json& j, const BuildPlan& p);
void from_json(const nlohmann::json& j, BuildPlan& p);
void to_json(nlohmann::json& j, const BeliefState& b);
void from_json(const nlohmann::json& j, BeliefState& b);
void to_json(nlohmann::json& j, const StepRecord& s);
void from_json(const nlohmann::json& j, StepRecord& s);
void to_json(nlohmann::json& j, const BuildTrace& t);
void from_json(const nlohmann::json& j, BuildTrace& t);

namespace filter {
void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);
}  // namespace filter

namespace control {
void to_json(nlohmann::json& j, const ControlDecision& d);
void from_json(const nlohmann::json& j, ControlDecision& d);
}  // namespace control

/// Parses `text` and converts to T, mapping any JSON error to ParseError.
template <typename T>
T parse_json_as(const std::string& text, const char* what);

}  // namespace leafctl
