#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cct/rng.hpp"

// P-value combination tests: the Cauchy combination test and the reference
// combiners it is compared against (max-of-squares with Gumbel calibration,
// min-p with Monte Carlo calibration, Fisher, Pearson, Stouffer, Edgington).

namespace cct {

enum class Method { CCT, MAX, MINP, FISHER, PEARSON, STOUFFER, EDGINGTON };
enum class Calibration { ANALYTIC, MONTE_CARLO };

const char* method_name(Method m);
const char* calibration_name(Calibration c);

struct TestOutcome {
  Method method = Method::CCT;
  double statistic = 0.0;
  double p_value = 1.0;
  Calibration calibration = Calibration::ANALYTIC;
  // present exactly when calibration is MONTE_CARLO
  std::optional<std::int64_t> mc_replicates;
  std::optional<double> mc_stderr;
  // set when an input p-value sat exactly on 0 or 1 and was clamped
  bool boundary_warning = false;

  std::string to_json() const;
};

// Input cleaning shared by every combiner. Entries must lie in [0,1];
// anything else (including NaN) throws std::invalid_argument. Exact 0 and 1
// are caller errors surfaced as a warning, not a panic: they are clamped to
// the working range [1e-300, 1 - 1e-16] along with any subnormal stragglers.
struct SanitizeReport {
  std::int64_t clamped_low = 0;
  std::int64_t clamped_high = 0;
  bool boundary_hit = false;  // an entry was exactly 0 or 1
};
std::vector<double> sanitize_pvalues(const std::vector<double>& p,
                                     SanitizeReport* report = nullptr);

// Equal weights 1/m, the default everywhere a weight vector is optional.
std::vector<double> equal_weights(std::int64_t m);

// One term of the Cauchy combination statistic, w * tan((0.5 - p) * pi),
// evaluated in three branches so no branch subtracts nearby quantities:
// cot(pi p) below 0.25, the direct form on [0.25, 0.75], -cot(pi (1-p))
// above. Below p = 1e-15 the reciprocal approximation w/(pi p) is used.
double cct_term(double p, double w);

// Weighted Cauchy combination statistic. Weights must be nonnegative and
// sum to 1 within 1e-12. Summation is exactly rounded, so the statistic is
// bit-identical under any permutation of the (p, w) pairs.
double cct_statistic(const std::vector<double>& p, const std::vector<double>& w);
// Standard Cauchy upper-tail calibration of the statistic.
double cct_pvalue(double statistic);
TestOutcome cct_test(const std::vector<double>& p, const std::vector<double>& w);

// Max-type statistic max_i z_i^2 and its Gumbel (type I extreme value)
// calibration: (max - a_tilde)/b_tilde is asymptotically standard Gumbel.
double max_statistic(const std::vector<double>& z);
struct GumbelNorm {
  double a_tilde;  // centering for max z^2
  double b_tilde;  // scaling for max z^2
  double a;        // centering for max |z| (square-root scale)
  double b;        // scaling for max |z|
  std::int64_t m;
};
// Requires m >= 2. With B = log log m + log(4 pi) - log 4 and L = log m:
// a_tilde = 2L - B + B/(2L), b_tilde = 2 - 1/L,
// a = sqrt(2L) - B/(2 sqrt(2L)), b = 1/sqrt(2L).
GumbelNorm gumbel_norm(std::int64_t m);
double max_pvalue_gumbel(double max_stat, std::int64_t m);
TestOutcome max_test_gumbel(const std::vector<double>& z);

// Minimum p-value statistic. The analytic reference calibration assumes
// independence (Sidak); the Monte Carlo calibration draws null p-value
// vectors from the supplied sampler and applies the add-one rule
// (1 + #{min <= observed}) / (replicates + 1), which never returns 0.
double minp_statistic(const std::vector<double>& p);
double sidak_pvalue(double min_p, std::int64_t m);
using NullSampler = std::function<std::vector<double>(RngStream&)>;
TestOutcome minp_pvalue_mc(const std::vector<double>& p_obs,
                           const NullSampler& null_sampler,
                           std::int64_t replicates, std::uint64_t seed,
                           int workers = 1);

// Fisher: -2 sum log p, chi-square upper tail with 2m degrees of freedom.
TestOutcome fisher(const std::vector<double>& p);
// Pearson: -sum log(1 - p), LOWER Gamma(m, 1) tail (sensitive to p near 1).
TestOutcome pearson_combine(const std::vector<double>& p);
// Stouffer: sum Phi^{-1}(1 - p_i), upper normal tail at stat/sqrt(m).
TestOutcome stouffer(const std::vector<double>& p);
// Edgington: sum p_i, LOWER Irwin-Hall tail; exact alternating sum for
// m <= 50, normal(m/2, m/12) approximation beyond.
TestOutcome edgington(const std::vector<double>& p);

// CDF of the sum of m iid U(0,1), exact for m <= 50 (log-space alternating
// sum with sign tracking), normal approximation for larger m.
double irwin_hall_cdf(std::int64_t m, double s);

}  // namespace cct
