#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cct/copulas.hpp"
#include "cct/rng.hpp"
#include "cct/special_functions.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cct;

namespace {

CopulaSpec make(CopulaFamily f, double theta) {
  CopulaSpec s;
  s.family = f;
  s.theta = theta;
  return s;
}

// every family with a representative parameter grid
std::vector<CopulaSpec> representative_specs() {
  std::vector<CopulaSpec> specs;
  specs.push_back(make(CopulaFamily::PRODUCT, 0.0));
  for (double th : {-1.0, -0.4, 0.6, 1.0}) specs.push_back(make(CopulaFamily::FGM, th));
  for (double th : {0.1, 0.5, 0.9}) specs.push_back(make(CopulaFamily::CUADRAS_AUGE, th));
  for (double th : {-0.8, 0.3, 0.9}) specs.push_back(make(CopulaFamily::NORMAL, th));
  for (double th : {-1.0, -0.5, 0.5, 0.9}) specs.push_back(make(CopulaFamily::AMH, th));
  for (double th : {0.2, 0.7, 1.0}) specs.push_back(make(CopulaFamily::SURVIVAL, th));
  return specs;
}

}  // namespace

TEST_CASE("copula axioms: margins and Frechet bounds") {
  for (const CopulaSpec& spec : representative_specs()) {
    CAPTURE(spec.describe());
    for (int i = 0; i <= 20; ++i) {
      const double u = i / 20.0;
      CHECK(copula_cdf(spec, u, 0.0) == 0.0);
      CHECK(copula_cdf(spec, 0.0, u) == 0.0);
      CHECK(copula_cdf(spec, u, 1.0) == doctest::Approx(u).epsilon(1e-12));
      CHECK(copula_cdf(spec, 1.0, u) == doctest::Approx(u).epsilon(1e-12));
      for (int j = 0; j <= 20; ++j) {
        const double v = j / 20.0;
        const double c = copula_cdf(spec, u, v);
        CHECK(c >= std::max(u + v - 1.0, 0.0) - 1e-12);
        CHECK(c <= std::min(u, v) + 1e-12);
      }
    }
  }
}

TEST_CASE("copulas are 2-increasing") {
  for (const CopulaSpec& spec : representative_specs()) {
    CAPTURE(spec.describe());
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        Rectangle r{i / 10.0, (i + 1) / 10.0, j / 10.0, (j + 1) / 10.0};
        CHECK(rectangle_prob(spec, r) >= 0.0);
      }
    }
  }
}

TEST_CASE("theta zero collapses every family to the product copula") {
  const CopulaSpec prod = make(CopulaFamily::PRODUCT, 0.0);
  for (CopulaFamily f : {CopulaFamily::FGM, CopulaFamily::CUADRAS_AUGE,
                         CopulaFamily::NORMAL, CopulaFamily::AMH,
                         CopulaFamily::SURVIVAL}) {
    const CopulaSpec spec = make(f, 0.0);
    for (double u : {0.05, 0.3, 0.77}) {
      for (double v : {0.11, 0.5, 0.94}) {
        CHECK(copula_cdf(spec, u, v) ==
              doctest::Approx(copula_cdf(prod, u, v)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("copula cdf frozen values") {
  CHECK(copula_cdf(make(CopulaFamily::FGM, 0.8), 0.5, 0.5) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(copula_cdf(make(CopulaFamily::SURVIVAL, 0.7), 0.3, 0.25) ==
        doctest::Approx(0.0233161351550337985).epsilon(1e-13));
  CHECK(copula_cdf(make(CopulaFamily::AMH, 0.6), 0.3, 0.25) ==
        doctest::Approx(0.109489051094890511).epsilon(1e-13));
  CHECK(copula_cdf(make(CopulaFamily::CUADRAS_AUGE, 0.4), 0.3, 0.25) ==
        doctest::Approx(0.121398343707550957).epsilon(1e-13));
  // normal family, checked against numerically integrated references
  CHECK(copula_cdf(make(CopulaFamily::NORMAL, 0.5), 1e-4, 2e-3) ==
        doctest::Approx(1.517024390926391e-5).epsilon(1e-11));
  CHECK(copula_cdf(make(CopulaFamily::NORMAL, 0.7), 0.3, 0.25) ==
        doctest::Approx(0.1684541562788883).epsilon(1e-11));
  CHECK(copula_cdf(make(CopulaFamily::NORMAL, -0.4), 0.75, 0.4) ==
        doctest::Approx(0.2483461374416625).epsilon(1e-11));
  CHECK(copula_cdf(make(CopulaFamily::NORMAL, 0.5), 0.3, 0.25) ==
        doctest::Approx(0.136895797335).epsilon(1e-11));
  CHECK(copula_cdf(make(CopulaFamily::NORMAL, -0.7), 0.9, 0.1) ==
        doctest::Approx(0.0532210220809).epsilon(1e-11));
}

TEST_CASE("copula parameter validation") {
  CHECK_THROWS_AS(make(CopulaFamily::FGM, 1.5).validate(), std::domain_error);
  CHECK_THROWS_AS(make(CopulaFamily::CUADRAS_AUGE, -0.1).validate(),
                  std::domain_error);
  CHECK_THROWS_AS(make(CopulaFamily::NORMAL, 0.999).validate(), std::domain_error);
  CHECK_THROWS_AS(make(CopulaFamily::SURVIVAL, 1.2).validate(), std::domain_error);
  CHECK_THROWS_AS((void)copula_cdf(make(CopulaFamily::FGM, 0.5), -0.1, 0.5),
                  std::domain_error);
  CHECK_THROWS_AS((void)copula_family_from_name("gumbel"), std::invalid_argument);
  CHECK(copula_family_from_name("cuadras-auge") == CopulaFamily::CUADRAS_AUGE);
  CHECK(copula_family_from_name("FGM") == CopulaFamily::FGM);
}

TEST_CASE("bivariate normal cdf frozen values") {
  CHECK(bvn_cdf(0.0, 0.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bvn_cdf(1.0, -0.5, 0.3) == doctest::Approx(0.283138420244481).epsilon(1e-12));
  CHECK(bvn_cdf(-1.0, 2.0, -0.7) == doctest::Approx(0.1402198541940397).epsilon(1e-12));
  CHECK(bvn_cdf(2.5, 1.5, 0.9) == doctest::Approx(0.9330929387495889).epsilon(1e-12));
  CHECK(bvn_cdf(-3.0, -2.0, 0.25) ==
        doctest::Approx(0.0001514334958088513).epsilon(1e-12));
  CHECK(bvn_cdf(0.7, 0.3, -0.99) ==
        doctest::Approx(0.3759477699658854).epsilon(1e-11));
}

TEST_CASE("bivariate normal deep upper tail keeps relative precision") {
  CHECK(bvn_upper_tail(10.0, 10.0, 0.5) ==
        doctest::Approx(4.4169782315529204127e-32).epsilon(1e-11));
  CHECK(bvn_upper_tail(35.0, 35.0, 0.9) ==
        doctest::Approx(1.0652564344374024666e-283).epsilon(1e-10));
  // this one lands in the subnormal range, so only a few digits survive
  CHECK(bvn_upper_tail(20.0, 25.0, -0.3) ==
        doctest::Approx(1.0330795928117133547e-320).epsilon(2e-3));
  // independent case is an exact product of tails
  CHECK(bvn_upper_tail(5.0, 8.0, 0.0) ==
        doctest::Approx(norm_sf(5.0) * norm_sf(8.0)).epsilon(1e-13));
  // symmetry in the two arguments
  CHECK(bvn_upper_tail(1.2, -0.4, 0.6) ==
        doctest::Approx(bvn_upper_tail(-0.4, 1.2, 0.6)).epsilon(1e-12));
}

TEST_CASE("bvn cdf and upper tail satisfy inclusion-exclusion") {
  for (double rho : {-0.8, -0.2, 0.4, 0.9}) {
    for (double h : {-1.5, 0.3, 2.0}) {
      for (double k : {-0.7, 0.9}) {
        const double lhs = bvn_cdf(h, k, rho);
        const double rhs =
            1.0 - norm_sf(h) - norm_sf(k) + bvn_upper_tail(h, k, rho);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("rectangle probabilities: frozen FGM value and quadrant identity") {
  Rectangle r{0.1, 0.4, 0.2, 0.6};
  CHECK(rectangle_prob(make(CopulaFamily::FGM, 0.5), r) ==
        doctest::Approx(0.126).epsilon(1e-12));
  for (const CopulaSpec& spec : representative_specs()) {
    CAPTURE(spec.describe());
    Rectangle full{0.0, 1.0, 0.0, 1.0};
    CHECK(rectangle_prob(spec, full) == doctest::Approx(1.0).epsilon(1e-12));
    const double u = 0.35, v = 0.62;
    const double q = rectangle_prob(spec, {0.0, u, 0.0, v}) +
                     rectangle_prob(spec, {0.0, u, v, 1.0}) +
                     rectangle_prob(spec, {u, 1.0, 0.0, v}) +
                     rectangle_prob(spec, {u, 1.0, v, 1.0});
    CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normal corner rectangles survive extreme tails") {
  const CopulaSpec spec = make(CopulaFamily::NORMAL, 0.5);
  const double u = norm_cdf(-20.0);
  // [0,u]^2 corner equals the bivariate tail at 20, far below the range the
  // inclusion-exclusion path could resolve
  const double corner = rectangle_prob(spec, {0.0, u, 0.0, u});
  CHECK(corner == doctest::Approx(bvn_upper_tail(20.0, 20.0, 0.5)).epsilon(1e-10));
  CHECK(corner > 0.0);
  // opposite corner [u,1] x [0,u] flips one sign of the correlation
  const double cross = rectangle_prob(spec, {u, 1.0, 0.0, u});
  CHECK(cross == doctest::Approx(bvn_upper_tail(-20.0, 20.0, -0.5)).epsilon(1e-10));
}

TEST_CASE("conditional quantile inverts the conditional cdf") {
  // finite-difference conditional F(v|u) ~ dC/du, then invert
  for (const CopulaSpec& spec : representative_specs()) {
    if (spec.family == CopulaFamily::CUADRAS_AUGE) continue;  // has an atom
    CAPTURE(spec.describe());
    const double h = 1e-6;
    for (double u : {0.2, 0.5, 0.8}) {
      for (double v : {0.15, 0.5, 0.85}) {
        const double w =
            (copula_cdf(spec, u + h, v) - copula_cdf(spec, u - h, v)) / (2 * h);
        if (w <= 1e-4 || w >= 1.0 - 1e-4) continue;
        CHECK(conditional_quantile(spec, u, w) == doctest::Approx(v).epsilon(5e-4));
      }
    }
  }
}

TEST_CASE("conditional quantile is monotone in w") {
  for (const CopulaSpec& spec : representative_specs()) {
    CAPTURE(spec.describe());
    for (double u : {0.25, 0.6}) {
      double prev = 0.0;
      for (int i = 1; i < 40; ++i) {
        const double w = i / 40.0;
        const double v = conditional_quantile(spec, u, w);
        CHECK(v >= prev - 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
      }
    }
  }
}

TEST_CASE("cuadras-auge conditional atom at v = u") {
  // P(V = u | U = u) = theta * u^(1-theta); average over U uniform gives
  // theta / (2 - theta)
  const double theta = 0.5;
  const CopulaSpec spec = make(CopulaFamily::CUADRAS_AUGE, theta);
  RngStream rs(4444);
  const int n = 100000;
  int atoms = 0;
  for (int i = 0; i < n; ++i) {
    const auto [u, v] = sample_pair(spec, rs);
    atoms += (v == u);
  }
  const double expected = theta / (2.0 - theta);
  const double se = std::sqrt(expected * (1.0 - expected) / n);
  CHECK(std::fabs(static_cast<double>(atoms) / n - expected) < 4.0 * se);
}

TEST_CASE("sampler matches rectangle probabilities cell by cell") {
  // 3x3 grid goodness of fit at modest n for every family
  const double cuts[4] = {0.0, 0.25, 0.62, 1.0};
  for (const CopulaSpec& spec : representative_specs()) {
    CAPTURE(spec.describe());
    RngStream rs(987);
    const int n = 50000;
    int counts[3][3] = {};
    for (int s = 0; s < n; ++s) {
      const auto [u, v] = sample_pair(spec, rs);
      int iu = u < cuts[1] ? 0 : (u < cuts[2] ? 1 : 2);
      int iv = v < cuts[1] ? 0 : (v < cuts[2] ? 1 : 2);
      ++counts[iu][iv];
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double prob = rectangle_prob(
            spec, {cuts[i], cuts[i + 1], cuts[j], cuts[j + 1]});
        const double se = std::sqrt(prob * (1.0 - prob) / n);
        CHECK(std::fabs(counts[i][j] / static_cast<double>(n) - prob) <
              4.5 * se + 1e-9);
      }
    }
  }
}

TEST_CASE("fgm sample spearman correlation is theta over three") {
  // for FGM, rho_S = theta/3 = 12 E[UV] - 3
  for (double theta : {-0.9, 0.6}) {
    const CopulaSpec spec = make(CopulaFamily::FGM, theta);
    RngStream rs(13131);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto [u, v] = sample_pair(spec, rs);
      const double x = 12.0 * u * v - 3.0;
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(std::fabs(mean - theta / 3.0) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("mixed copula sample layout") {
  const CopulaSpec spec = make(CopulaFamily::FGM, 1.0);
  RngStream rs(808);
  const std::vector<double> odd = mixed_copula_sample(spec, 7, rs);
  CHECK(odd.size() == 7);
  for (double x : odd) {
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  // consecutive pairs carry the copula dependence: positive covariance
  // for FGM theta = 1 (rho_S = 1/3)
  RngStream rs2(809);
  const int n = 30000;
  double acc = 0.0;
  for (int r = 0; r < n; ++r) {
    const std::vector<double> x = mixed_copula_sample(spec, 2, rs2);
    acc += 12.0 * x[0] * x[1] - 3.0;
  }
  CHECK(acc / n == doctest::Approx(1.0 / 3.0).epsilon(0.15));
  // margins stay uniform
  RngStream rs3(810);
  std::vector<double> pool;
  for (int r = 0; r < 4000; ++r) {
    const std::vector<double> x = mixed_copula_sample(spec, 5, rs3);
    pool.insert(pool.end(), x.begin(), x.end());
  }
  CHECK(test_helpers::ks_uniform(pool) < 1.95 / std::sqrt(20000.0));
}

TEST_CASE("product decay certificate matches the closed form") {
  const CopulaSpec spec = make(CopulaFamily::PRODUCT, 0.0);
  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5, 1e6};
  const DecayReport rep =
      condition_decay_check(spec, 0.1, 0.1, MRule::fixed(10), grid);
  CHECK(rep.joint_strictly_decreasing());
  CHECK(rep.cross_strictly_decreasing());
  const double a = 0.1 * 10.0 / kPi;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double delta = 1.0 / std::sqrt(t);
    CHECK(rep.delta_t[i] == doctest::Approx(delta).epsilon(1e-12));
    CHECK(rep.p_joint[i] ==
          doctest::Approx((a / t) * (a / (delta * t))).epsilon(1e-12));
    CHECK(rep.p_cross[i] ==
          doctest::Approx((a / ((1.0 + delta) * t)) * (a / (delta * t)))
              .epsilon(1e-12));
    CHECK(rep.scaled_joint[i] == doctest::Approx(t * rep.p_joint[i]).epsilon(1e-12));
  }
}

TEST_CASE("decay certificates hold at representative parameters") {
  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5, 1e6};
  const MRule fixed = MRule::fixed(10);
  for (const CopulaSpec& spec :
       {make(CopulaFamily::FGM, 1.0), make(CopulaFamily::FGM, -1.0),
        make(CopulaFamily::CUADRAS_AUGE, 0.5), make(CopulaFamily::NORMAL, 0.75),
        make(CopulaFamily::AMH, 0.9), make(CopulaFamily::SURVIVAL, 1.0)}) {
    CAPTURE(spec.describe());
    const DecayReport rep = condition_decay_check(spec, 0.1, 0.1, fixed, grid);
    CHECK(rep.joint_strictly_decreasing());
    CHECK(rep.cross_strictly_decreasing());
  }
  // divergent regime spot checks
  const DecayReport dprod = condition_decay_check(
      make(CopulaFamily::PRODUCT, 0.0), 0.1, 0.1, MRule::divergent(0.5), grid);
  CHECK(dprod.joint_strictly_decreasing());
  CHECK(dprod.cross_strictly_decreasing());
  CHECK(dprod.m_values.front() == 3);  // floor(100^0.25)
  CHECK(dprod.m_values.back() == 31);  // floor((1e6)^0.25)
  const DecayReport dca =
      condition_decay_check(make(CopulaFamily::CUADRAS_AUGE, 0.1), 0.1, 0.1,
                            MRule::divergent(0.2), grid);
  CHECK(dca.joint_strictly_decreasing());
  CHECK(dca.cross_strictly_decreasing());
  MRule dnorm = MRule::divergent(0.0);  // gamma comes from beta below
  dnorm.beta = 0.8;
  const DecayReport dn = condition_decay_check(make(CopulaFamily::NORMAL, 0.5),
                                               0.1, 0.1, dnorm, grid);
  CHECK(dn.gamma == doctest::Approx(2.0 * 0.8 / 1.5 - 1.0).epsilon(1e-12));
  CHECK(dn.joint_strictly_decreasing());
  CHECK(dn.cross_strictly_decreasing());
}

TEST_CASE("amh at the upper boundary genuinely fails the joint certificate") {
  // theta = 1 induces lower tail dependence; t * P(joint) tends to a
  // positive constant instead of vanishing, and the report says so
  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5, 1e6};
  const DecayReport rep = condition_decay_check(make(CopulaFamily::AMH, 1.0),
                                                0.1, 0.1, MRule::fixed(10), grid);
  CHECK_FALSE(rep.joint_strictly_decreasing());
}

TEST_CASE("certificate input validation") {
  const std::vector<double> grid = {1e2, 1e3};
  // weight so large the joint event bound leaves the unit square
  CHECK_THROWS_AS((void)condition_decay_check(make(CopulaFamily::PRODUCT, 0.0),
                                              40.0, 0.1, MRule::fixed(10), grid),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)condition_decay_check(make(CopulaFamily::PRODUCT, 0.0),
                                              0.1, 0.1, MRule::divergent(1.5), grid),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)condition_decay_check(make(CopulaFamily::PRODUCT, 0.0),
                                              0.1, 0.1, MRule::fixed(1), grid),
                  std::invalid_argument);
}

TEST_CASE("decay report csv round trip") {
  const DecayReport rep = condition_decay_check(
      make(CopulaFamily::FGM, 0.5), 0.1, 0.1, MRule::fixed(10), {1e2, 1e4, 1e6});
  const std::string csv = rep.to_csv();
  const auto lines = test_helpers::split_lines(csv);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "t,m,delta_t,p_joint,p_cross,scaled_joint,scaled_cross");
  // reparse the last row and compare numerically
  double t, delta, pj, pc, sj, sc;
  long long m;
  REQUIRE(std::sscanf(lines[3].c_str(), "%lg,%lld,%lg,%lg,%lg,%lg,%lg", &t, &m,
                      &delta, &pj, &pc, &sj, &sc) == 7);
  CHECK(t == doctest::Approx(1e6).epsilon(1e-12));
  CHECK(m == 10);
  CHECK(pj == doctest::Approx(rep.p_joint[2]).epsilon(1e-15));
  CHECK(sc == doctest::Approx(rep.scaled_cross[2]).epsilon(1e-15));
}
