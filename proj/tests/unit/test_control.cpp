#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "gen.hpp"
#include "leafctl/control.hpp"
#include "leafctl/error.hpp"

using namespace leafctl;

namespace {

const ProcessModel kModel{0.3073, 4.5593, 1.0579, 0.6907};
const BuildPlan kPlan{.n = 3, .target_k = 30};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("equal split") {
  CHECK(control::allocate_equal_split(30, 0, 3) == doctest::Approx(10.0));
  CHECK(control::allocate_equal_split(30, 30, 2) == 0.0);
  CHECK(control::allocate_equal_split(30, 11.55, 2) == doctest::Approx(9.225));
  CHECK(code_of([] { control::allocate_equal_split(30, 0, 0); }) == ErrorCode::NoLeavesRemaining);
}

TEST_CASE("receding-horizon density, reference builds") {
  CHECK(control::optimal_density(kPlan, kModel, 0.0, 0).recommended_density ==
        doctest::Approx(17.705).epsilon(1e-4));
  CHECK(std::abs(control::optimal_density(kPlan, kModel, 11.55, 1).recommended_density - 15.186) < 0.02);
  CHECK(std::abs(control::optimal_density(kPlan, kModel, 18.65, 2).recommended_density - 22.108) < 0.02);
  CHECK(std::abs(control::optimal_density({.n = 3, .target_k = 40}, kModel, 0.0, 0).recommended_density -
                 28.552) < 0.001);

  CHECK(code_of([] { control::optimal_density(kPlan, {0, 4.5, 1, 1}, 0.0, 0); }) == ErrorCode::ZeroAlpha);
  CHECK(code_of([] { control::optimal_density(kPlan, kModel, 29.0, 3); }) == ErrorCode::NoLeavesRemaining);
}

TEST_CASE("clamping and rounding") {
  const BuildPlan tight{.n = 3, .target_k = 30, .d_min = 10, .d_max = 20};
  const auto high = control::optimal_density(tight, kModel, 0.0, 2);
  CHECK(high.clamped);
  CHECK(high.recommended_density == 20.0);
  CHECK(high.unclamped_density > 20.0);
  const auto low = control::optimal_density(tight, kModel, 29.0, 2);
  CHECK(low.clamped);
  CHECK(low.recommended_density == 10.0);
  const auto mid = control::optimal_density(tight, kModel, 0.0, 0);
  CHECK_FALSE(mid.clamped);

  BuildPlan stepped = kPlan;
  stepped.density_increment = 0.5;
  const auto s = control::optimal_density(stepped, kModel, 0.0, 0);
  CHECK(s.recommended_density == 17.5);
  CHECK(s.clamped);
  CHECK(s.unclamped_density == doctest::Approx(17.70485).epsilon(1e-6));
}

TEST_CASE("density is nonincreasing in the belief mean and stays in bounds") {
  testing::Gen gen(7);
  for (int i = 0; i < 300; ++i) {
    const auto m = gen.model();
    BuildPlan p{.n = gen.integer(1, 8), .target_k = gen.uniform(5, 60)};
    p.d_min = gen.uniform(0, 20);
    p.d_max = p.d_min + gen.uniform(1, 80);
    const int step = gen.integer(0, p.n - 1);
    const double mu1 = gen.uniform(-10, 60);
    const double mu2 = mu1 + gen.uniform(0, 10);
    const auto a = control::optimal_density(p, m, mu1, step);
    const auto b = control::optimal_density(p, m, mu2, step);
    CHECK(b.recommended_density <= a.recommended_density);
    CHECK(a.recommended_density >= p.d_min);
    CHECK(a.recommended_density <= p.d_max);
    if (!a.clamped) CHECK(a.predicted_final_mean == doctest::Approx(p.target_k).epsilon(1e-10));
  }
}

TEST_CASE("equal split minimizes the quadratic cost among target-meeting allocations") {
  testing::Gen gen(13);
  for (int i = 0; i < 1000; ++i) {
    const auto m = gen.model();
    const int remaining = gen.integer(2, 6);
    const double gap = gen.uniform(1, 40);
    const double per_leaf = control::allocate_equal_split(gap, 0.0, remaining);
    const double d_eq = (per_leaf - m.beta) / m.alpha;

    // Perturb by a zero-sum vector: the expected stiffness is unchanged.
    std::vector<double> delta(static_cast<std::size_t>(remaining));
    for (auto& x : delta) x = gen.normal();
    const double avg = std::accumulate(delta.begin(), delta.end(), 0.0) / remaining;
    double cost_eq = 0.0, cost_alt = 0.0, stiff_alt = 0.0;
    for (auto x : delta) {
      const double d = d_eq + (x - avg);
      cost_eq += d_eq * d_eq;
      cost_alt += d * d;
      stiff_alt += m.leaf_mean(d);
    }
    CHECK(stiff_alt == doctest::Approx(gap).epsilon(1e-9));
    CHECK(cost_eq <= cost_alt + 1e-9);
  }
}

TEST_CASE("predict_final") {
  const std::vector<double> open(3, 17.70485);
  const auto p = control::predict_final(kPlan, kModel, {}, open);
  CHECK(p.mean == doctest::Approx(30.0).epsilon(1e-5));
  CHECK(p.sd == doctest::Approx(std::sqrt(3.0) * 1.0579).epsilon(1e-12));

  const BeliefState done{3, 29.5, 0.09};
  const auto q = control::predict_final(kPlan, kModel, done, {});
  CHECK(q.mean == 29.5);
  CHECK(q.sd == doctest::Approx(0.3));

  // The r = 1 posterior and its own receding-horizon density meet K.
  const BeliefState b1{1, 11.072738438876891, 0.3344842690521588};
  const auto d = control::optimal_density(kPlan, kModel, b1);
  const std::vector<double> rest(2, d.recommended_density);
  CHECK(control::predict_final(kPlan, kModel, b1, rest).mean == doctest::Approx(30.0).epsilon(1e-10));

  CHECK(code_of([&] { control::predict_final(kPlan, kModel, b1, open); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("linear material cost is degenerate") {
  const auto r = control::linear_cost_degeneracy_check(kPlan, kModel);
  REQUIRE(r.density_sums.size() == 3);
  for (double s : r.density_sums) CHECK(s == doctest::Approx(53.1146).epsilon(1e-5));
  CHECK(r.constant);
  CHECK_FALSE(r.vacuous);
  // The allocations really differ.
  CHECK(r.allocations[0] != r.allocations[1]);

  const auto zero = control::linear_cost_degeneracy_check({.n = 3, .target_k = 30}, {1, 0, 0, 0}, 30.0);
  for (double s : zero.density_sums) CHECK(s == doctest::Approx(0.0));

  const auto single = control::linear_cost_degeneracy_check(kPlan, kModel, 20.0, 2);
  CHECK(single.vacuous);
  CHECK(single.constant);
}
