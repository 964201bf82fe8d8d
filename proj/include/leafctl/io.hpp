#pragma once

// CSV and file helpers for calibration data, traces and model files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "leafctl/model.hpp"

namespace leafctl::io {

inline constexpr std::string_view kBendingHeader =
    "specimen_id,density_pct,trial,deflection_mm,load_kg";
inline constexpr std::string_view kStiffnessHeader =
    "specimen_id,density_pct,trial,stiffness_kg_per_mm";
inline constexpr std::string_view kTraceHeader =
    "strategy,target_k,step,applied_density,true_stiffness,observed_stiffness,belief_mean,"
    "belief_variance";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
int parse_int(std::string_view text, std::string_view what);
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Reads either calibration CSV form, chosen by the header line.
CalibrationDataset read_calibration_csv(std::istream& in);
CalibrationDataset load_calibration_csv(const std::filesystem::path& path);
void write_calibration_csv(std::ostream& out, const CalibrationDataset& data);

void write_trace_csv(std::ostream& out, const BuildTrace& trace);
BuildTrace read_trace_csv(std::istream& in);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

ProcessModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ProcessModel& model);

}  // namespace leafctl::io
