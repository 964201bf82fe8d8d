#include "leafctl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "leafctl/error.hpp"

namespace leafctl::filter {

namespace {

// Probability that N(0, sd) falls in [a, b), computed on the tail that
// keeps the erfc difference well conditioned.
double normal_mass(double a, double b, double sd) {
  if (sd == 0.0) return (a <= 0.0 && 0.0 < b) ? 1.0 : 0.0;
  const double za = a / (sd * std::numbers::sqrt2);
  const double zb = b / (sd * std::numbers::sqrt2);
  if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
  return 1.0 - 0.5 * (std::erfc(-za) + std::erfc(zb));
}

double normal_pdf(double x, double sd) {
  const double z = x / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Weight of a displacement of `offset` grid cells under N(shift, sd). Wide
// kernels are sampled pointwise (trapezoid rule, exponentially accurate for a
// Gaussian); kernels narrower than a cell are integrated over the cell.
double kernel_weight(double offset, double shift, double sd, double h) {
  const double x = offset * h - shift;
  if (sd >= h) return h * normal_pdf(x, sd);
  return normal_mass(x - 0.5 * h, x + 0.5 * h, sd);
}

struct GridResult {
  double mean;
  double variance;
  double log_evidence;
};

GridResult run_grid(const ProcessModel& model, std::span<const double> densities,
                    std::span<const Observation> observations, double lo, double hi, int points) {
  const auto n = static_cast<std::size_t>(points);
  const double h = (hi - lo) / (points - 1);
  const double sp = model.sigma_p;
  std::vector<double> w(n, 0.0);
  std::vector<double> next(n, 0.0);

  // Step 1 prior: K_0 = 0 exactly, so the predicted law is the kernel itself
  // centred on the origin (which need not be a grid point).
  {
    const double shift = model.leaf_mean(densities[0]);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = lo + static_cast<double>(j) * h;
      w[j] = kernel_weight(x / h, shift, sp, h);
    }
  }

  double log_evidence = 0.0;
  for (std::size_t step = 0; step < densities.size(); ++step) {
    if (step > 0) {
      const double shift = model.leaf_mean(densities[step]);
      const double reach = 12.0 * sp + h;
      const auto m_lo = static_cast<long>(std::floor((shift - reach) / h));
      const auto m_hi = static_cast<long>(std::ceil((shift + reach) / h));
      std::vector<double> kernel(static_cast<std::size_t>(m_hi - m_lo + 1));
      for (long m = m_lo; m <= m_hi; ++m) {
        kernel[static_cast<std::size_t>(m - m_lo)] =
            kernel_weight(static_cast<double>(m), shift, sp, h);
      }
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        if (w[k] == 0.0) continue;
        const long j_lo = std::max<long>(0, static_cast<long>(k) + m_lo);
        const long j_hi = std::min<long>(points - 1, static_cast<long>(k) + m_hi);
        for (long j = j_lo; j <= j_hi; ++j) {
          next[static_cast<std::size_t>(j)] +=
              w[k] * kernel[static_cast<std::size_t>(j - static_cast<long>(k) - m_lo)];
        }
      }
      w.swap(next);
    }

    const auto& obs = observations[step];
    const double so = std::sqrt(effective_obs_variance(model, obs.repetitions));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = lo + static_cast<double>(j) * h;
      // Likelihood as a density in the observed value.
      w[j] *= kernel_weight((obs.value - x) / h, 0.0, so, h) / h;
      z += w[j];
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
      throw Error(ErrorCode::GridTooCoarse,
                  "posterior mass vanished on the grid at step " + std::to_string(step + 1));
    }
    for (auto& v : w) v /= z;
    log_evidence += std::log(z);
  }

  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean += (lo + static_cast<double>(j) * h) * w[j];
  double var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = lo + static_cast<double>(j) * h - mean;
    var += dx * dx * w[j];
  }
  return {mean, var, log_evidence};
}

}  // namespace

Grid default_oracle_grid(const ProcessModel& model, std::span<const double> densities,
                         std::span<const Observation> observations, int points, double width) {
  double lo = 0.0;
  double hi = 0.0;
  double predicted = 0.0;
  double max_obs_var = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    predicted += model.leaf_mean(densities[i]);
    lo = std::min(lo, predicted);
    hi = std::max(hi, predicted);
    if (i < observations.size()) {
      lo = std::min(lo, observations[i].value);
      hi = std::max(hi, observations[i].value);
      max_obs_var = std::max(max_obs_var, effective_obs_variance(model, observations[i].repetitions));
    }
  }
  const double sd = std::sqrt(static_cast<double>(densities.size()) * model.sigma_p * model.sigma_p +
                              max_obs_var);
  return Grid{.lo = lo - width * sd, .hi = hi + width * sd, .points = points};
}

PosteriorMoments posterior_oracle(const ProcessModel& model, std::span<const double> densities,
                                  std::span<const Observation> observations, const Grid& grid,
                                  const OracleOptions& options) {
  if (densities.empty() || densities.size() != observations.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "densities and observations must have equal nonzero length");
  }
  if (grid.points < 3 || !(grid.hi > grid.lo)) {
    throw Error(ErrorCode::GridTooCoarse, "grid needs at least 3 points and hi > lo");
  }
  const auto coarse = run_grid(model, densities, observations, grid.lo, grid.hi, grid.points);
  if (options.check_refinement) {
    const auto fine =
        run_grid(model, densities, observations, grid.lo, grid.hi, 2 * grid.points - 1);
    const double drift = std::abs(fine.log_evidence - coarse.log_evidence);
    if (drift > options.refinement_tolerance) {
      throw Error(ErrorCode::GridTooCoarse,
                  "log-evidence moved by " + std::to_string(drift) + " under refinement");
    }
  }
  return {coarse.mean, coarse.variance, coarse.log_evidence};
}

}  // namespace leafctl::filter
