#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "leafctl/calibration.hpp"
#include "leafctl/fixtures.hpp"
#include "leafctl/io.hpp"

using namespace leafctl;
namespace fs = std::filesystem;

namespace {

std::pair<double, double> moments(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

TEST_CASE("generated trials carry exact moments") {
  const auto v = fixtures::generate_trials(6.4024, 0.4432, 5, 123);
  REQUIRE(v.size() == 5);
  const auto [m, s] = moments(v);
  CHECK(m == doctest::Approx(6.4024).epsilon(1e-14));
  CHECK(s == doctest::Approx(0.4432).epsilon(1e-14));
  CHECK(v == fixtures::generate_trials(6.4024, 0.4432, 5, 123));
  CHECK(v != fixtures::generate_trials(6.4024, 0.4432, 5, 124));

  for (double x : fixtures::generate_trials(7.5, 0.0, 5, 1)) CHECK(x == 7.5);
  CHECK_THROWS(fixtures::generate_trials(7.5, 0.1, 1, 1));
}

TEST_CASE("reference dataset reproduces every reference cell") {
  const auto summaries = calibration::summarize_specimens(fixtures::reference_stiffness_dataset());
  REQUIRE(summaries.size() == 15);
  for (std::size_t g = 0; g < 5; ++g) {
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& x = summaries[g * 3 + s];
      CHECK(x.density_pct == fixtures::kDensities[g]);
      CHECK(x.mean_stiffness == doctest::Approx(fixtures::kSpecimenMeans[g][s]).epsilon(1e-13));
      CHECK(*x.sd_stiffness == doctest::Approx(fixtures::kSpecimenSds[g][s]).epsilon(1e-13));
    }
  }
}

TEST_CASE("committed fixture files are byte-identical to a fresh generation") {
  const fs::path dir = fs::temp_directory_path() / ("leafctl-fx-" + std::to_string(std::random_device{}()));
  fixtures::write_fixture_files(dir);
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir);
    INFO(rel.string());
    const fs::path committed = fs::path(LEAFCTL_FIXTURE_DIR) / rel;
    REQUIRE(fs::exists(committed));
    CHECK(io::read_file(committed) == io::read_file(entry.path()));
    ++compared;
  }
  CHECK(compared == 6);
  fs::remove_all(dir);
}
