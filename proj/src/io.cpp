#include "leafctl/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "leafctl/error.hpp"
#include "leafctl/json.hpp"

namespace leafctl::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string row_context(std::size_t line_no) { return "line " + std::to_string(line_no); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> parse_optional(std::string_view cell, std::string_view what) {
  if (trim(cell).empty()) return std::nullopt;
  return parse_double(cell, what);
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError,
                "expected a number for " + std::string(what) + ", got '" + std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError,
                "expected an integer for " + std::string(what) + ", got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

CalibrationDataset read_calibration_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::string header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = std::string(trim(line));
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "calibration CSV is empty");

  const bool bending = header == kBendingHeader;
  if (!bending && header != kStiffnessHeader) {
    throw Error(ErrorCode::ParseError, "unrecognized calibration CSV header '" + header + "'");
  }

  std::vector<BendingRecord> bending_rows;
  std::vector<StiffnessRecord> stiffness_rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const auto ctx = row_context(line_no);
    if (cells.size() != (bending ? 5u : 4u)) {
      throw Error(ErrorCode::ParseError, ctx + ": wrong number of columns");
    }
    if (cells[0].empty()) throw Error(ErrorCode::ParseError, ctx + ": empty specimen_id");
    const std::string id(cells[0]);
    const double density = parse_double(cells[1], ctx + " density_pct");
    const int trial = parse_int(cells[2], ctx + " trial");
    if (bending) {
      bending_rows.push_back({id, density, trial, parse_double(cells[3], ctx + " deflection_mm"),
                              parse_double(cells[4], ctx + " load_kg")});
    } else {
      stiffness_rows.push_back({id, density, trial, parse_double(cells[3], ctx + " stiffness")});
    }
  }
  if (bending ? bending_rows.empty() : stiffness_rows.empty()) {
    throw Error(ErrorCode::ParseError, "calibration CSV has a header but no rows");
  }
  if (bending) return bending_rows;
  return stiffness_rows;
}

CalibrationDataset load_calibration_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_calibration_csv(in);
}

void write_calibration_csv(std::ostream& out, const CalibrationDataset& data) {
  if (const auto* rows = std::get_if<std::vector<BendingRecord>>(&data)) {
    out << kBendingHeader << '\n';
    for (const auto& r : *rows) {
      out << r.specimen_id << ',' << format_double(r.density_pct) << ',' << r.trial << ','
          << format_double(r.deflection_mm) << ',' << format_double(r.load_kg) << '\n';
    }
    return;
  }
  out << kStiffnessHeader << '\n';
  for (const auto& r : std::get<std::vector<StiffnessRecord>>(data)) {
    out << r.specimen_id << ',' << format_double(r.density_pct) << ',' << r.trial << ','
        << format_double(r.stiffness) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const BuildTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& s : trace.steps) {
    out << to_string(trace.strategy) << ',' << format_double(trace.target_k) << ','
        << s.belief_after.step << ',' << format_double(s.applied_density) << ','
        << optional_cell(s.true_stiffness) << ',' << optional_cell(s.observed_stiffness) << ','
        << format_double(s.belief_after.mean) << ',' << format_double(s.belief_after.variance)
        << '\n';
  }
}

BuildTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw Error(ErrorCode::ParseError, "missing trace CSV header");
  }
  BuildTrace trace;
  bool first = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const auto ctx = row_context(line_no);
    if (cells.size() != 8) throw Error(ErrorCode::ParseError, ctx + ": wrong number of columns");
    const auto kind = strategy_from_string(cells[0]);
    const double target = parse_double(cells[1], ctx + " target_k");
    if (first) {
      trace.strategy = kind;
      trace.target_k = target;
      first = false;
    } else if (kind != trace.strategy || target != trace.target_k) {
      throw Error(ErrorCode::ParseError, ctx + ": strategy/target differs from earlier rows");
    }
    StepRecord step;
    step.belief_after.step = parse_int(cells[2], ctx + " step");
    step.applied_density = parse_double(cells[3], ctx + " applied_density");
    step.true_stiffness = parse_optional(cells[4], ctx + " true_stiffness");
    step.observed_stiffness = parse_optional(cells[5], ctx + " observed_stiffness");
    step.belief_after.mean = parse_double(cells[6], ctx + " belief_mean");
    step.belief_after.variance = parse_double(cells[7], ctx + " belief_variance");
    if (!trace.steps.empty() && step.belief_after.step <= trace.steps.back().belief_after.step) {
      throw Error(ErrorCode::ParseError, ctx + ": step indices must increase");
    }
    trace.steps.push_back(step);
  }
  finalize_trace(trace);
  return trace;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

ProcessModel load_model(const std::filesystem::path& path) {
  const auto model = parse_json_as<ProcessModel>(read_file(path), path.string().c_str());
  validate(model);
  return model;
}

void save_model(const std::filesystem::path& path, const ProcessModel& model) {
  write_file(path, nlohmann::json(model).dump(2) + "\n");
}

}  // namespace leafctl::io
