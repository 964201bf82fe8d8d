#include "leafctl/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>

#include "leafctl/error.hpp"

namespace leafctl::calibration {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// (slope, intercept) of y on x by ordinary least squares.
std::pair<double, double> ols(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw Error(ErrorCode::DegenerateRegression, "all regressor values are equal");
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

struct TrialKey {
  std::string specimen_id;
  int trial;
  auto operator<=>(const TrialKey&) const = default;
};

struct SpecimenAccumulator {
  double density = 0.0;
  std::map<int, double> trials;
};

void add_trial(std::map<std::string, SpecimenAccumulator>& specimens, const std::string& id,
               double density, int trial, double stiffness) {
  auto [it, inserted] = specimens.try_emplace(id);
  auto& acc = it->second;
  if (inserted) {
    acc.density = density;
  } else if (acc.density != density) {
    throw Error(ErrorCode::InvalidDataset, "specimen '" + id + "' appears with more than one density");
  }
  if (!acc.trials.emplace(trial, stiffness).second) {
    throw Error(ErrorCode::InvalidDataset,
                "duplicate trial " + std::to_string(trial) + " for specimen '" + id + "'");
  }
}

std::map<std::string, SpecimenAccumulator> collect(const std::vector<StiffnessRecord>& rows) {
  std::map<std::string, SpecimenAccumulator> specimens;
  for (const auto& r : rows) add_trial(specimens, r.specimen_id, r.density_pct, r.trial, r.stiffness);
  return specimens;
}

// Specimen means grouped by density, ascending.
std::map<double, std::vector<double>> group_by_density(std::span<const SpecimenSummary> summaries) {
  std::map<double, std::vector<double>> groups;
  for (const auto& s : summaries) groups[s.density_pct].push_back(s.mean_stiffness);
  return groups;
}

}  // namespace

std::vector<StiffnessRecord> reduce_bending(const std::vector<BendingRecord>& rows) {
  std::map<TrialKey, std::vector<BendingPoint>> points;
  std::map<TrialKey, double> densities;
  for (const auto& r : rows) {
    const TrialKey key{r.specimen_id, r.trial};
    points[key].push_back({r.deflection_mm, r.load_kg});
    auto [it, inserted] = densities.emplace(key, r.density_pct);
    if (!inserted && it->second != r.density_pct) {
      throw Error(ErrorCode::InvalidDataset,
                  "specimen '" + r.specimen_id + "' appears with more than one density");
    }
  }
  std::vector<StiffnessRecord> out;
  out.reserve(points.size());
  for (auto& [key, pts] : points) {
    std::sort(pts.begin(), pts.end(), [](const BendingPoint& a, const BendingPoint& b) {
      return std::tie(a.deflection_mm, a.load_kg) < std::tie(b.deflection_mm, b.load_kg);
    });
    double k = 0.0;
    try {
      k = stiffness_from_bending(pts);
    } catch (const Error& e) {
      throw Error(e.code(), "specimen '" + key.specimen_id + "' trial " +
                                std::to_string(key.trial) + ": " + e.detail());
    }
    out.push_back({key.specimen_id, densities.at(key), key.trial, k});
  }
  return out;
}

double stiffness_from_bending(std::span<const BendingPoint> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::DegenerateRegression, "need at least two load/deflection points");
  }
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(p.deflection_mm);
    y.push_back(p.load_kg);
  }
  return ols(x, y).first;
}

std::vector<SpecimenSummary> summarize_specimens(const CalibrationDataset& data) {
  const auto specimens = std::visit(
      [](const auto& rows) {
        if constexpr (std::is_same_v<std::decay_t<decltype(rows)>, std::vector<BendingRecord>>) {
          return collect(reduce_bending(rows));
        } else {
          return collect(rows);
        }
      },
      data);
  std::vector<SpecimenSummary> out;
  out.reserve(specimens.size());
  for (const auto& [id, acc] : specimens) {
    SpecimenSummary s{.specimen_id = id, .density_pct = acc.density};
    for (const auto& [trial, k] : acc.trials) s.trial_stiffnesses.push_back(k);
    s.mean_stiffness = mean_of(s.trial_stiffnesses);
    if (s.trial_stiffnesses.size() >= 2) s.sd_stiffness = sample_sd(s.trial_stiffnesses);
    out.push_back(std::move(s));
  }
  return out;
}

AffineFit fit_affine_model(std::span<const SpecimenSummary> summaries) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [density, means] : group_by_density(summaries)) {
    x.push_back(density);
    y.push_back(mean_of(means));
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::DegenerateRegression, "need at least two distinct densities");
  }
  const auto [slope, intercept] = ols(x, y);
  return {slope, intercept};
}

double estimate_sigma_p(std::span<const SpecimenSummary> summaries) {
  double total = 0.0;
  int groups = 0;
  for (const auto& [density, means] : group_by_density(summaries)) {
    if (means.size() < 2) continue;
    total += sample_sd(means);
    ++groups;
  }
  if (groups == 0) {
    throw Error(ErrorCode::InsufficientReplication, "no density has two or more specimens");
  }
  return total / groups;
}

double estimate_sigma_o(std::span<const SpecimenSummary> summaries) {
  if (summaries.empty()) {
    throw Error(ErrorCode::InsufficientReplication, "no specimens");
  }
  double total = 0.0;
  for (const auto& s : summaries) {
    if (!s.sd_stiffness) {
      throw Error(ErrorCode::InsufficientReplication,
                  "specimen '" + s.specimen_id + "' has fewer than two trials");
    }
    total += *s.sd_stiffness;
  }
  return total / static_cast<double>(summaries.size());
}

ProcessModel calibrate(const CalibrationDataset& data) {
  const auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(e.code(), std::string(name) + ": " + e.detail());
    }
  };
  const auto summaries = stage("summarize", [&] { return summarize_specimens(data); });
  const auto fit = stage("affine fit", [&] { return fit_affine_model(summaries); });
  const double sigma_p = stage("process noise", [&] { return estimate_sigma_p(summaries); });
  const double sigma_o = stage("observation noise", [&] { return estimate_sigma_o(summaries); });
  ProcessModel model{fit.alpha, fit.beta, sigma_p, sigma_o};
  stage("validate", [&] {
    validate(model);
    return 0;
  });
  return model;
}

}  // namespace leafctl::calibration
