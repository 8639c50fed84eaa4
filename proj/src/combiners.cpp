#include "cct/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "cct/exact_sum.hpp"
#include "cct/parallel.hpp"
#include "cct/special_functions.hpp"

namespace cct {

namespace {

constexpr double kPLow = 1e-300;
constexpr double kPHigh = 1.0 - 1e-16;

void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

void check_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

void validate_weights(const std::vector<double>& w) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("weights must sum to 1 within 1e-12");
  }
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::CCT: return "CCT";
    case Method::MAX: return "MAX";
    case Method::MINP: return "MINP";
    case Method::FISHER: return "FISHER";
    case Method::PEARSON: return "PEARSON";
    case Method::STOUFFER: return "STOUFFER";
    case Method::EDGINGTON: return "EDGINGTON";
  }
  return "?";
}

const char* calibration_name(Calibration c) {
  return c == Calibration::ANALYTIC ? "ANALYTIC" : "MONTE_CARLO";
}

std::string TestOutcome::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method_name(method);
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["calibration"] = calibration_name(calibration);
  if (mc_replicates) j["mc_replicates"] = *mc_replicates;
  if (mc_stderr) j["mc_stderr"] = *mc_stderr;
  j["boundary_warning"] = boundary_warning;
  return j.dump();
}

std::vector<double> sanitize_pvalues(const std::vector<double>& p,
                                     SanitizeReport* report) {
  SanitizeReport local;
  std::vector<double> out;
  out.reserve(p.size());
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("p-values must lie in [0,1]");
    }
    if (x == 0.0 || x == 1.0) local.boundary_hit = true;
    if (x < kPLow) {
      x = kPLow;
      ++local.clamped_low;
    } else if (x > kPHigh) {
      x = kPHigh;
      ++local.clamped_high;
    }
    out.push_back(x);
  }
  if (report) *report = local;
  return out;
}

std::vector<double> equal_weights(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("equal_weights: m must be >= 1");
  return std::vector<double>(static_cast<std::size_t>(m),
                             1.0 / static_cast<double>(m));
}

double cct_term(double p, double w) {
  if (p < 1e-15) return w / (kPi * p);
  if (p < 0.25) return w / std::tan(kPi * p);
  if (p <= 0.75) return w * std::tan((0.5 - p) * kPi);
  return -w / std::tan(kPi * (1.0 - p));
}

double cct_statistic(const std::vector<double>& p, const std::vector<double>& w) {
  check_nonempty(p.size(), "cct_statistic");
  check_same_length(p.size(), w.size(), "cct_statistic");
  validate_weights(w);
  const std::vector<double> ps = sanitize_pvalues(p);
  ExactSum sum;
  for (std::size_t i = 0; i < ps.size(); ++i) sum.add(cct_term(ps[i], w[i]));
  return sum.result();
}

double cct_pvalue(double statistic) { return cauchy_tail(statistic); }

TestOutcome cct_test(const std::vector<double>& p, const std::vector<double>& w) {
  check_nonempty(p.size(), "cct_test");
  check_same_length(p.size(), w.size(), "cct_test");
  validate_weights(w);
  SanitizeReport rep;
  const std::vector<double> ps = sanitize_pvalues(p, &rep);
  ExactSum sum;
  for (std::size_t i = 0; i < ps.size(); ++i) sum.add(cct_term(ps[i], w[i]));
  TestOutcome out;
  out.method = Method::CCT;
  out.statistic = sum.result();
  out.p_value = cauchy_tail(out.statistic);
  out.calibration = Calibration::ANALYTIC;
  out.boundary_warning = rep.boundary_hit;
  return out;
}

double max_statistic(const std::vector<double>& z) {
  check_nonempty(z.size(), "max_statistic");
  double best = -1.0;
  for (double x : z) {
    if (std::isnan(x)) throw std::invalid_argument("max_statistic: NaN input");
    best = std::max(best, x * x);
  }
  return best;
}

GumbelNorm gumbel_norm(std::int64_t m) {
  if (m < 2) throw std::domain_error("gumbel_norm: m must be >= 2");
  const double L = std::log(static_cast<double>(m));
  const double B = std::log(L) + std::log(4.0 * kPi) - std::log(4.0);
  GumbelNorm g;
  g.a_tilde = 2.0 * L - B + B / (2.0 * L);
  g.b_tilde = 2.0 - 1.0 / L;
  const double s = std::sqrt(2.0 * L);
  g.a = s - B / (2.0 * s);
  g.b = 1.0 / s;
  g.m = m;
  return g;
}

double max_pvalue_gumbel(double max_stat, std::int64_t m) {
  const GumbelNorm g = gumbel_norm(m);
  const double x = (max_stat - g.a_tilde) / g.b_tilde;
  // 1 - exp(-exp(-x)) without cancellation for large x
  return -std::expm1(-std::exp(-x));
}

TestOutcome max_test_gumbel(const std::vector<double>& z) {
  TestOutcome out;
  out.method = Method::MAX;
  out.statistic = max_statistic(z);
  out.p_value = max_pvalue_gumbel(out.statistic, static_cast<std::int64_t>(z.size()));
  out.calibration = Calibration::ANALYTIC;
  return out;
}

double minp_statistic(const std::vector<double>& p) {
  check_nonempty(p.size(), "minp_statistic");
  const std::vector<double> ps = sanitize_pvalues(p);
  return *std::min_element(ps.begin(), ps.end());
}

double sidak_pvalue(double min_p, std::int64_t m) {
  if (!(min_p > 0.0 && min_p < 1.0)) {
    throw std::domain_error("sidak_pvalue: min_p must lie strictly in (0,1)");
  }
  if (m < 1) throw std::domain_error("sidak_pvalue: m must be >= 1");
  return -std::expm1(static_cast<double>(m) * std::log1p(-min_p));
}

TestOutcome minp_pvalue_mc(const std::vector<double>& p_obs,
                           const NullSampler& null_sampler,
                           std::int64_t replicates, std::uint64_t seed,
                           int workers) {
  check_nonempty(p_obs.size(), "minp_pvalue_mc");
  if (replicates < 1) {
    throw std::invalid_argument("minp_pvalue_mc: replicates must be >= 1");
  }
  SanitizeReport rep;
  const std::vector<double> ps = sanitize_pvalues(p_obs, &rep);
  const double observed = *std::min_element(ps.begin(), ps.end());

  std::vector<std::int64_t> hits(static_cast<std::size_t>(std::max(workers, 1)), 0);
  parallel_chunks(replicates, workers, [&](std::int64_t b, std::int64_t e, int w) {
    std::int64_t local = 0;
    for (std::int64_t r = b; r < e; ++r) {
      RngStream stream = substream(seed, stream_id(stream_purpose::kMinp,
                                                   static_cast<std::uint64_t>(r)));
      const std::vector<double> null_p = null_sampler(stream);
      double mn = 1.0;
      for (double x : null_p) mn = std::min(mn, x);
      if (mn <= observed) ++local;
    }
    hits[static_cast<std::size_t>(w)] += local;
  });
  std::int64_t k = 0;
  for (std::int64_t h : hits) k += h;

  TestOutcome out;
  out.method = Method::MINP;
  out.statistic = observed;
  out.p_value = static_cast<double>(1 + k) / static_cast<double>(replicates + 1);
  out.calibration = Calibration::MONTE_CARLO;
  out.mc_replicates = replicates;
  out.mc_stderr = std::sqrt(out.p_value * (1.0 - out.p_value) /
                            static_cast<double>(replicates));
  out.boundary_warning = rep.boundary_hit;
  return out;
}

TestOutcome fisher(const std::vector<double>& p) {
  check_nonempty(p.size(), "fisher");
  SanitizeReport rep;
  const std::vector<double> ps = sanitize_pvalues(p, &rep);
  ExactSum sum;
  for (double x : ps) sum.add(-2.0 * std::log(x));
  TestOutcome out;
  out.method = Method::FISHER;
  out.statistic = sum.result();
  out.p_value = chi2_sf(out.statistic, 2.0 * static_cast<double>(ps.size()));
  out.calibration = Calibration::ANALYTIC;
  out.boundary_warning = rep.boundary_hit;
  return out;
}

TestOutcome pearson_combine(const std::vector<double>& p) {
  check_nonempty(p.size(), "pearson_combine");
  SanitizeReport rep;
  const std::vector<double> ps = sanitize_pvalues(p, &rep);
  ExactSum sum;
  for (double x : ps) sum.add(-std::log1p(-x));
  TestOutcome out;
  out.method = Method::PEARSON;
  out.statistic = sum.result();
  // small statistics are the evidence against the null here
  out.p_value = gamma_p(static_cast<double>(ps.size()), out.statistic);
  out.calibration = Calibration::ANALYTIC;
  out.boundary_warning = rep.boundary_hit;
  return out;
}

TestOutcome stouffer(const std::vector<double>& p) {
  check_nonempty(p.size(), "stouffer");
  SanitizeReport rep;
  const std::vector<double> ps = sanitize_pvalues(p, &rep);
  ExactSum sum;
  // Phi^{-1}(1 - p) = -Phi^{-1}(p), which keeps precision for tiny p
  for (double x : ps) sum.add(-norm_quantile(x));
  TestOutcome out;
  out.method = Method::STOUFFER;
  out.statistic = sum.result();
  out.p_value = norm_sf(out.statistic /
                        std::sqrt(static_cast<double>(ps.size())));
  out.calibration = Calibration::ANALYTIC;
  out.boundary_warning = rep.boundary_hit;
  return out;
}

double irwin_hall_cdf(std::int64_t m, double s) {
  if (m < 1) throw std::domain_error("irwin_hall_cdf: m must be >= 1");
  if (s <= 0.0) return 0.0;
  if (s >= static_cast<double>(m)) return 1.0;
  if (m > 50) {
    // normal approximation, mean m/2 variance m/12
    const double mu = 0.5 * static_cast<double>(m);
    const double sd = std::sqrt(static_cast<double>(m) / 12.0);
    return norm_cdf((s - mu) / sd);
  }
  // exact alternating sum (1/m!) sum_k (-1)^k C(m,k) (s-k)^m, evaluated in
  // log space with sign tracking; loses roughly one digit per ten terms.
  // log of the k-th term: C(m,k)(s-k)^m/m! = (s-k)^m / (k! (m-k)!)
  const int kmax = static_cast<int>(std::floor(s));
  double scale = -1e308;  // running max of the log terms
  std::vector<double> logs(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) {
    if (s - k <= 0.0) {
      logs[static_cast<std::size_t>(k)] = -1e308;
      continue;
    }
    const double lt = -std::lgamma(k + 1.0) -
                      std::lgamma(static_cast<double>(m - k) + 1.0) +
                      static_cast<double>(m) * std::log(s - k);
    logs[static_cast<std::size_t>(k)] = lt;
    scale = std::max(scale, lt);
  }
  double acc = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const double term = std::exp(logs[static_cast<std::size_t>(k)] - scale);
    acc += (k % 2 == 0) ? term : -term;
  }
  const double val = acc * std::exp(scale);
  return std::clamp(val, 0.0, 1.0);
}

TestOutcome edgington(const std::vector<double>& p) {
  check_nonempty(p.size(), "edgington");
  SanitizeReport rep;
  const std::vector<double> ps = sanitize_pvalues(p, &rep);
  ExactSum sum;
  for (double x : ps) sum.add(x);
  TestOutcome out;
  out.method = Method::EDGINGTON;
  out.statistic = sum.result();
  out.p_value = irwin_hall_cdf(static_cast<std::int64_t>(ps.size()), out.statistic);
  out.calibration = Calibration::ANALYTIC;
  out.boundary_warning = rep.boundary_hit;
  return out;
}

}  // namespace cct
