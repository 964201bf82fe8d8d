#include <doctest.h>

#include <cmath>
#include <vector>

#include "gen.hpp"
#include "leafctl/error.hpp"
#include "leafctl/filter.hpp"
#include "leafctl/oracle.hpp"

using namespace leafctl;
using filter::Observation;

namespace {

const ProcessModel kModel{0.3073, 4.5593, 1.0579, 0.6907};
const double kD1 = (10.0 - 4.5593) / 0.3073;

filter::PosteriorMoments run_oracle(const ProcessModel& m, const std::vector<double>& d,
                                    const std::vector<Observation>& y, const filter::OracleOptions& opt = {}) {
  return filter::posterior_oracle(m, d, y, filter::default_oracle_grid(m, d, y), opt);
}

}  // namespace

TEST_CASE("oracle single step, reference model") {
  const auto p = run_oracle(kModel, {17.705}, {{11.53, 1}});
  CHECK(std::abs(p.mean - 11.072738438876891) < 1e-6);
  CHECK(std::abs(p.variance - 0.3344842690521588) < 1e-6);
}

TEST_CASE("oracle agrees with chained updates") {
  testing::Gen gen(101);
  for (int c = 0; c < 40; ++c) {
    const auto m = gen.model();
    const int steps = 1 + c % 3;
    std::vector<double> d;
    std::vector<Observation> y;
    BeliefState b{};
    double truth = 0.0;
    for (int s = 0; s < steps; ++s) {
      d.push_back(gen.uniform(0, 60));
      truth += m.leaf_mean(d.back()) + m.sigma_p * gen.normal();
      const int r = gen.integer(1, 6);
      y.push_back({truth + m.sigma_o / std::sqrt(r) * gen.normal(), r});
      b = filter::update(b, m, d.back(), y.back());
    }
    const auto p = run_oracle(m, d, y);
    INFO("case " << c);
    CHECK(std::abs(p.mean - b.mean) < 1e-4);
    CHECK(std::abs(p.variance - b.variance) < 1e-4);
  }
}

TEST_CASE("oracle approaches the deterministic sum in the noiseless limit") {
  const ProcessModel m{0.3073, 4.5593, 1e-6, 1e-6};
  const std::vector<double> d{17.705, 15.0, 20.0};
  double sum = 0.0;
  std::vector<Observation> y;
  for (double x : d) {
    sum += m.leaf_mean(x);
    y.push_back({sum, 1});
  }
  filter::OracleOptions opt;
  opt.check_refinement = false;
  const auto p = run_oracle(m, d, y, opt);
  CHECK(std::abs(p.mean - sum) < 1e-4);
  CHECK(p.variance < 1e-4);
}

TEST_CASE("oracle errors") {
  const std::vector<double> d{17.705, 15.0};
  const std::vector<Observation> y{{10.0, 1}};
  try {
    filter::posterior_oracle(kModel, d, y, filter::Grid{});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }

  // A handful of points over a wide range cannot resolve the posterior.
  const std::vector<double> d1{kD1};
  const std::vector<Observation> y1{{11.53, 1}};
  try {
    filter::posterior_oracle(kModel, d1, y1, filter::Grid{-50.0, 80.0, 15});
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
}
