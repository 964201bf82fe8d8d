#pragma once

// Brute-force posterior of the stack stiffness by numerical integration on a
// uniform grid. It re-derives the filter from the Bayes recursion (predict by
// convolving with the process noise, weight by the observation likelihood,
// renormalize) without using any closed-form update, and exists to check
// `filter::update`.

#include <span>

#include "leafctl/filter.hpp"
#include "leafctl/model.hpp"

namespace leafctl::filter {

struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  int points = 4001;
};

struct OracleOptions {
  // Maximum relative change of the log-evidence between the grid and its
  // 2x refinement before GridTooCoarse is raised.
  double refinement_tolerance = 1e-6;
  bool check_refinement = true;
};

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double log_evidence = 0.0;
};

/// Grid spanning every predicted and observed stack stiffness +/- `width`
/// combined standard deviations.
Grid default_oracle_grid(const ProcessModel& model, std::span<const double> densities,
                         std::span<const Observation> observations, int points = 4001,
                         double width = 8.0);

PosteriorMoments posterior_oracle(const ProcessModel& model, std::span<const double> densities,
                                  std::span<const Observation> observations, const Grid& grid,
                                  const OracleOptions& options = {});

}  // namespace leafctl::filter
