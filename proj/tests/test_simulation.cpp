#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "cct/simulation.hpp"
#include "cct/special_functions.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cct;

namespace {

CorrelationSpec ar1(std::int64_t m, double rho) {
  CorrelationSpec s;
  s.model = CorrModel::AR1;
  s.m = m;
  s.rho = rho;
  return s;
}

Scenario single_normal() { return Scenario::correlated_normal(ar1(1, 0.0)); }

}  // namespace

TEST_CASE("default t grid shape") {
  const std::vector<double> grid = default_t_grid();
  REQUIRE(grid.size() == 40);
  CHECK(grid.front() == cauchy_quantile(0.95));
  CHECK(grid.back() == 1000.0);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("m = 1 statistic is exactly standard Cauchy") {
  // a single two-sided normal p-value is uniform, so tan((0.5 - p) pi) has
  // the reference distribution with no approximation error at all
  const TailCalibration cal = tail_calibration(single_normal(), 100000, 2024, 4);
  REQUIRE(cal.t_grid.size() == 40);
  for (std::size_t i = 0; i < cal.t_grid.size(); ++i) {
    const double se = std::max(cal.mc_stderr[i], 1e-12);
    CHECK(std::fabs(cal.empirical_tail[i] - cal.cauchy_tail_ref[i]) < 4.5 * se);
  }
  // size at the usual levels
  const double s05 = size_check(single_normal(), 0.05, 100000, 2024, 4);
  CHECK(std::fabs(s05 - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / 100000.0));
  const double s01 = size_check(single_normal(), 0.01, 100000, 2024, 4);
  CHECK(std::fabs(s01 - 0.01) < 3.0 * std::sqrt(0.01 * 0.99 / 100000.0));
}

TEST_CASE("empirical tail is nonincreasing and tracks the reference deep out") {
  CorrelationSpec spiked;
  spiked.model = CorrModel::SPIKED_EIGEN;
  spiked.m = 10;
  spiked.d = 5;
  spiked.basis_seed = 7;
  const TailCalibration cal =
      tail_calibration(Scenario::correlated_normal(spiked), 100000, 99, 4);
  for (std::size_t i = 1; i < cal.empirical_tail.size(); ++i) {
    CHECK(cal.empirical_tail[i] <= cal.empirical_tail[i - 1]);
  }
  // at the largest grid point still holding >= 100 expected exceedances the
  // ratio to the Cauchy reference should be close to one
  std::size_t pick = 0;
  for (std::size_t i = 0; i < cal.t_grid.size(); ++i) {
    if (cal.cauchy_tail_ref[i] * 100000.0 >= 100.0) pick = i;
  }
  const double ratio = cal.empirical_tail[pick] / cal.cauchy_tail_ref[pick];
  CHECK(ratio > 0.7);
  CHECK(ratio < 1.3);
}

TEST_CASE("tail calibration is bit identical across worker counts") {
  CopulaSpec fgm;
  fgm.family = CopulaFamily::FGM;
  fgm.theta = 0.8;
  const Scenario sc = Scenario::mixed_copula(fgm, 10);
  const TailCalibration w1 = tail_calibration(sc, 20000, 5150, 1);
  const TailCalibration w4 = tail_calibration(sc, 20000, 5150, 4);
  const TailCalibration w16 = tail_calibration(sc, 20000, 5150, 16);
  CHECK(w1.to_csv() == w4.to_csv());
  CHECK(w1.to_csv() == w16.to_csv());
  CHECK(size_check(sc, 0.05, 20000, 5150, 1) == size_check(sc, 0.05, 20000, 5150, 16));
}

TEST_CASE("tail calibration artifacts") {
  const TailCalibration cal = tail_calibration(single_normal(), 2000, 8);
  const std::vector<std::string> lines = test_helpers::split_lines(cal.to_csv());
  REQUIRE(lines.size() == 41);
  CHECK(lines[0] == "t,empirical,reference,stderr");
  const nlohmann::json j = nlohmann::json::parse(cal.to_json());
  CHECK(j.at("replicates").get<std::int64_t>() == 2000);
  CHECK(j.at("seed").get<std::uint64_t>() == 8);
  CHECK(j.at("scenario").get<std::string>() == cal.scenario);
  CHECK(j.at("t_grid").size() == 40);
  CHECK(j.at("empirical_tail").size() == 40);
  CHECK(j.at("cauchy_tail_ref").size() == 40);
  CHECK(j.at("mc_stderr").size() == 40);
}

TEST_CASE("power rises with the signal level") {
  MeanSpec mean;
  mean.support_fraction = 0.2;
  std::vector<double> power, se;
  for (double mag : {0.5, 1.5, 2.5}) {
    mean.magnitude = mag;
    const PowerResult r = power_study(ar1(0, 0.2), mean, {100}, 0.05, 1500, 777, 4);
    power.push_back(r.power_cct[0]);
    se.push_back(r.stderr_joint[0]);
  }
  CHECK(power[1] > power[0] - 2.0 * (se[0] + se[1]));
  CHECK(power[2] > power[1] - 2.0 * (se[1] + se[2]));
  CHECK(power[2] > power[0] + 0.1);  // the spread is real, not noise
}

TEST_CASE("auto tuning lands the middle m near half power") {
  MeanSpec mean;
  mean.support_fraction = 0.1;  // magnitude left NaN, so the study tunes it
  const PowerResult r =
      power_study(ar1(0, 0.5), mean, {80, 100, 120}, 0.05, 2000, 31337, 4);
  REQUIRE(r.power_cct.size() == 3);
  CHECK(r.power_cct[1] > 0.35);
  CHECK(r.power_cct[1] < 0.65);
  CHECK(r.tuned_multiplier >= 0.1);
  CHECK(r.tuned_multiplier <= 3.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expect = r.tuned_multiplier *
                          std::sqrt(1.2 * std::log(static_cast<double>(r.m_grid[i])));
    CHECK(r.magnitudes[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("power study output and worker invariance") {
  MeanSpec mean;
  mean.support_fraction = 0.2;
  mean.magnitude = 1.5;
  const PowerResult w1 = power_study(ar1(0, 0.2), mean, {50, 100}, 0.05, 600, 4242, 1);
  const PowerResult w4 = power_study(ar1(0, 0.2), mean, {50, 100}, 0.05, 600, 4242, 4);
  const PowerResult w16 =
      power_study(ar1(0, 0.2), mean, {50, 100}, 0.05, 600, 4242, 16);
  CHECK(w1.to_csv() == w4.to_csv());
  CHECK(w1.to_csv() == w16.to_csv());
  const std::vector<std::string> lines = test_helpers::split_lines(w1.to_csv());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "m,power_cct,power_max,stderr");
  const nlohmann::json j = nlohmann::json::parse(w1.to_json());
  CHECK(j.at("m_grid").size() == 2);
  CHECK(j.at("power_cct").size() == 2);
  CHECK(j.at("power_max").size() == 2);
  CHECK(j.at("magnitudes").size() == 2);
  CHECK(j.at("alpha").get<double>() == 0.05);
  CHECK(j.at("tuned_multiplier").get<double>() == 1.0);  // no tuning happened
}

TEST_CASE("monte carlo calibrated max agrees with gumbel to leading order") {
  MeanSpec mean;
  mean.support_fraction = 0.1;
  mean.magnitude = 2.2;
  const PowerResult gum =
      power_study(ar1(0, 0.2), mean, {200}, 0.05, 2000, 606, 4, false);
  const PowerResult mc =
      power_study(ar1(0, 0.2), mean, {200}, 0.05, 2000, 606, 4, true);
  // same replicates, different max threshold; the powers should be close
  CHECK(std::fabs(gum.power_max[0] - mc.power_max[0]) < 0.1);
  CHECK(gum.power_cct[0] == mc.power_cct[0]);  // the cct side is untouched
}

TEST_CASE("simulation input validation") {
  MeanSpec mean;
  mean.support_fraction = 0.1;
  mean.magnitude = 1.0;
  CorrelationSpec expl;
  expl.model = CorrModel::EXPLICIT;
  expl.m = 2;
  expl.explicit_matrix = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS((void)power_study(expl, mean, {2}, 0.05, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)power_study(ar1(0, 0.2), mean, {}, 0.05, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)power_study(ar1(0, 0.2), mean, {10}, 1.5, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)power_study(ar1(0, 0.2), mean, {10}, 0.05, 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)tail_calibration(single_normal(), 0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      (void)tail_calibration(single_normal(), 100, 1, 1, {5.0, 4.0}),
      std::invalid_argument);
  CHECK_THROWS_AS((void)size_check(single_normal(), 0.0, 100, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)Scenario::mixed_copula(CopulaSpec{}, 0),
                  std::invalid_argument);
}
