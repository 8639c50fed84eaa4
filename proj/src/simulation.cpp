#include "cct/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cct/combiners.hpp"
#include "cct/exact_sum.hpp"
#include "cct/parallel.hpp"
#include "cct/special_functions.hpp"

namespace cct {

namespace {

constexpr std::int64_t kBlock = 256;

// CCT statistic with equal weights from a z row, identical arithmetic to
// z_to_pvalues followed by cct_statistic
double cct_stat_from_z(const double* z, std::int64_t m) {
  const double w = 1.0 / static_cast<double>(m);
  ExactSum sum;
  for (std::int64_t j = 0; j < m; ++j) {
    const double p = std::clamp(erfc_cody(std::fabs(z[j]) / 1.41421356237309504880),
                                1e-300, 1.0 - 1e-16);
    sum.add(cct_term(p, w));
  }
  return sum.result();
}

double cct_stat_from_p(const std::vector<double>& p) {
  const double w = 1.0 / static_cast<double>(p.size());
  ExactSum sum;
  for (double x : p) sum.add(cct_term(std::clamp(x, 1e-300, 1.0 - 1e-16), w));
  return sum.result();
}

// Null CCT statistics for every replicate, one substream per replicate.
std::vector<double> scenario_cct_stats(const Scenario& sc, std::int64_t n,
                                       std::uint64_t seed, std::uint64_t purpose,
                                       int workers) {
  std::vector<double> stats(static_cast<std::size_t>(n));
  RngStream root(seed);
  if (sc.kind == Scenario::Kind::CORRELATED_NORMAL) {
    const CorrelationMatrix R = build_correlation(sc.corr);
    const std::int64_t m = R.size();
    const Eigen::MatrixXd lt = R.factor.transpose();
    parallel_chunks(n, workers, [&](std::int64_t b, std::int64_t e, int) {
      Eigen::MatrixXd g(kBlock, m);
      Eigen::MatrixXd z(kBlock, m);
      for (std::int64_t start = b; start < e; start += kBlock) {
        const std::int64_t rows = std::min(kBlock, e - start);
        for (std::int64_t i = 0; i < rows; ++i) {
          RngStream rs = root.fork(
              stream_id(purpose, static_cast<std::uint64_t>(start + i)));
          for (std::int64_t j = 0; j < m; ++j) g(i, j) = rs.next_normal();
        }
        z.topRows(rows).noalias() = g.topRows(rows) * lt;
        for (std::int64_t i = 0; i < rows; ++i) {
          Eigen::RowVectorXd row = z.row(i);
          stats[static_cast<std::size_t>(start + i)] = cct_stat_from_z(row.data(), m);
        }
      }
    });
  } else {
    const CopulaSpec cop = sc.copula;
    const std::int64_t m = sc.m;
    parallel_chunks(n, workers, [&](std::int64_t b, std::int64_t e, int) {
      for (std::int64_t r = b; r < e; ++r) {
        RngStream rs =
            root.fork(stream_id(purpose, static_cast<std::uint64_t>(r)));
        const std::vector<double> p = mixed_copula_sample(cop, m, rs);
        stats[static_cast<std::size_t>(r)] = cct_stat_from_p(p);
      }
    });
  }
  return stats;
}

}  // namespace

Scenario Scenario::correlated_normal(const CorrelationSpec& spec) {
  spec.validate();
  Scenario sc;
  sc.kind = Kind::CORRELATED_NORMAL;
  sc.corr = spec;
  sc.m = spec.m;
  return sc;
}

Scenario Scenario::mixed_copula(const CopulaSpec& spec, std::int64_t m) {
  spec.validate();
  if (m < 1) throw std::invalid_argument("Scenario: m must be >= 1");
  Scenario sc;
  sc.kind = Kind::MIXED_COPULA;
  sc.copula = spec;
  sc.m = m;
  return sc;
}

std::int64_t Scenario::dimension() const {
  return kind == Kind::CORRELATED_NORMAL ? corr.m : m;
}

std::string Scenario::describe() const {
  if (kind == Kind::CORRELATED_NORMAL) return corr.describe();
  char buf[128];
  std::snprintf(buf, sizeof buf, "mixed-%s(m=%lld)", copula.describe().c_str(),
                static_cast<long long>(m));
  return buf;
}

std::vector<double> default_t_grid() {
  const double t0 = cauchy_quantile(0.95);
  const double t1 = 1000.0;
  const int n = 40;
  std::vector<double> grid(n);
  const double l0 = std::log(t0), l1 = std::log(t1);
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] =
        std::exp(l0 + (l1 - l0) * i / (n - 1));
  }
  grid.front() = t0;
  grid.back() = t1;
  return grid;
}

std::string TailCalibration::to_csv() const {
  std::string out = "t,empirical,reference,stderr\n";
  char buf[160];
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", t_grid[i],
                  empirical_tail[i], cauchy_tail_ref[i], mc_stderr[i]);
    out += buf;
  }
  return out;
}

std::string TailCalibration::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["replicates"] = replicates;
  j["t_grid"] = t_grid;
  j["empirical_tail"] = empirical_tail;
  j["cauchy_tail_ref"] = cauchy_tail_ref;
  j["mc_stderr"] = mc_stderr;
  return j.dump(2);
}

TailCalibration tail_calibration(const Scenario& scenario, std::int64_t replicates,
                                 std::uint64_t seed, int workers,
                                 const std::vector<double>& t_grid) {
  if (replicates < 1) {
    throw std::invalid_argument("tail_calibration: replicates must be >= 1");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("tail_calibration: empty t grid");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument("tail_calibration: t grid must increase");
    }
  }
  const std::vector<double> stats = scenario_cct_stats(
      scenario, replicates, seed, stream_purpose::kTail, workers);

  // one pass: bin by #(grid points below the statistic), then suffix-sum
  const std::size_t nt = t_grid.size();
  std::vector<std::int64_t> bins(nt + 1, 0);
  for (double s : stats) {
    const std::size_t d = static_cast<std::size_t>(
        std::lower_bound(t_grid.begin(), t_grid.end(), s) - t_grid.begin());
    ++bins[d];
  }
  TailCalibration out;
  out.t_grid = t_grid;
  out.replicates = replicates;
  out.scenario = scenario.describe();
  out.seed = seed;
  out.empirical_tail.resize(nt);
  out.cauchy_tail_ref.resize(nt);
  out.mc_stderr.resize(nt);
  std::int64_t running = 0;
  for (std::size_t j = nt; j-- > 0;) {
    running += bins[j + 1];
    const double emp = static_cast<double>(running) / static_cast<double>(replicates);
    out.empirical_tail[j] = emp;
    out.cauchy_tail_ref[j] = cauchy_tail(t_grid[j]);
    out.mc_stderr[j] =
        std::sqrt(emp * (1.0 - emp) / static_cast<double>(replicates));
  }
  return out;
}

double size_check(const Scenario& scenario, double alpha, std::int64_t replicates,
                  std::uint64_t seed, int workers) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("size_check: alpha must lie in (0,1)");
  }
  if (replicates < 1) {
    throw std::invalid_argument("size_check: replicates must be >= 1");
  }
  const std::vector<double> stats = scenario_cct_stats(
      scenario, replicates, seed, stream_purpose::kSize, workers);
  std::int64_t hits = 0;
  for (double s : stats) {
    if (cauchy_tail(s) <= alpha) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(replicates);
}

std::string PowerResult::to_csv() const {
  std::string out = "m,power_cct,power_max,stderr\n";
  char buf[160];
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(m_grid[i]), power_cct[i], power_max[i],
                  stderr_joint[i]);
    out += buf;
  }
  return out;
}

std::string PowerResult::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["alpha"] = alpha;
  j["replicates"] = replicates;
  j["m_grid"] = m_grid;
  j["power_cct"] = power_cct;
  j["power_max"] = power_max;
  j["stderr"] = stderr_joint;
  j["magnitudes"] = magnitudes;
  j["tuned_multiplier"] = tuned_multiplier;
  return j.dump(2);
}

namespace {

struct RejectCounts {
  std::int64_t cct = 0;
  std::int64_t max = 0;
};

// Count rejections of both tests over n replicates drawn from N(mu, R).
// max_threshold is in max|z| scale; cct_threshold in statistic scale.
RejectCounts power_cell(const CorrelationMatrix& R, const Eigen::VectorXd& mu,
                        std::int64_t n, double cct_threshold,
                        double max_threshold, const RngStream& root,
                        std::uint64_t purpose, std::uint64_t id_base,
                        int workers) {
  const std::int64_t m = R.size();
  const Eigen::MatrixXd lt = R.factor.transpose();
  std::vector<RejectCounts> per_worker(static_cast<std::size_t>(std::max(workers, 1)));
  parallel_chunks(n, workers, [&](std::int64_t b, std::int64_t e, int wk) {
    Eigen::MatrixXd g(kBlock, m);
    Eigen::MatrixXd z(kBlock, m);
    RejectCounts local;
    for (std::int64_t start = b; start < e; start += kBlock) {
      const std::int64_t rows = std::min(kBlock, e - start);
      for (std::int64_t i = 0; i < rows; ++i) {
        RngStream rs = root.fork(stream_id(
            purpose, id_base + static_cast<std::uint64_t>(start + i)));
        for (std::int64_t j = 0; j < m; ++j) g(i, j) = rs.next_normal();
      }
      z.topRows(rows).noalias() = g.topRows(rows) * lt;
      z.topRows(rows).rowwise() += mu.transpose();
      for (std::int64_t i = 0; i < rows; ++i) {
        Eigen::RowVectorXd row = z.row(i);
        if (cct_stat_from_z(row.data(), m) > cct_threshold) ++local.cct;
        if (row.cwiseAbs().maxCoeff() > max_threshold) ++local.max;
      }
    }
    per_worker[static_cast<std::size_t>(wk)].cct += local.cct;
    per_worker[static_cast<std::size_t>(wk)].max += local.max;
  });
  RejectCounts total;
  for (const auto& c : per_worker) {
    total.cct += c.cct;
    total.max += c.max;
  }
  return total;
}

// Empirical (1-alpha) quantile of max|z| under the null, for the Monte Carlo
// calibrated variant of the MAX test.
double max_null_quantile(const CorrelationMatrix& R, std::int64_t n, double alpha,
                         const RngStream& root, std::uint64_t id_base,
                         int workers) {
  const std::int64_t m = R.size();
  const Eigen::MatrixXd lt = R.factor.transpose();
  std::vector<double> maxima(static_cast<std::size_t>(n));
  parallel_chunks(n, workers, [&](std::int64_t b, std::int64_t e, int) {
    Eigen::MatrixXd g(kBlock, m);
    Eigen::MatrixXd z(kBlock, m);
    for (std::int64_t start = b; start < e; start += kBlock) {
      const std::int64_t rows = std::min(kBlock, e - start);
      for (std::int64_t i = 0; i < rows; ++i) {
        RngStream rs = root.fork(stream_id(
            stream_purpose::kPowerTune,
            id_base + static_cast<std::uint64_t>(start + i)));
        for (std::int64_t j = 0; j < m; ++j) g(i, j) = rs.next_normal();
      }
      z.topRows(rows).noalias() = g.topRows(rows) * lt;
      for (std::int64_t i = 0; i < rows; ++i) {
        maxima[static_cast<std::size_t>(start + i)] = z.row(i).cwiseAbs().maxCoeff();
      }
    }
  });
  std::sort(maxima.begin(), maxima.end());
  const std::size_t k = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(n)));
  return maxima[std::min(k, maxima.size() - 1)];
}

}  // namespace

PowerResult power_study(const CorrelationSpec& corr_template, const MeanSpec& mean,
                        const std::vector<std::int64_t>& m_grid, double alpha,
                        std::int64_t replicates, std::uint64_t seed, int workers,
                        bool mc_calibrated_max) {
  if (corr_template.model == CorrModel::EXPLICIT) {
    throw std::invalid_argument("power_study: needs a formula correlation model");
  }
  if (m_grid.empty()) throw std::invalid_argument("power_study: empty m grid");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("power_study: alpha must lie in (0,1)");
  }
  if (replicates < 1) {
    throw std::invalid_argument("power_study: replicates must be >= 1");
  }

  RngStream root(seed);
  const double cct_threshold = cauchy_quantile(1.0 - alpha);
  const double gq = gumbel_quantile(1.0 - alpha);

  // factorizations are the dominant setup cost; build each m once
  std::vector<CorrelationMatrix> mats;
  mats.reserve(m_grid.size());
  for (std::int64_t m : m_grid) {
    CorrelationSpec spec = corr_template;
    spec.m = m;
    mats.push_back(build_correlation(spec));
  }

  double multiplier = 1.0;
  const bool tune = std::isnan(mean.magnitude);
  if (tune) {
    // bisect c so CCT power at the middle m is ~0.5 (pilot runs)
    const std::size_t mid = m_grid.size() / 2;
    const std::int64_t m_tune = m_grid[mid];
    const CorrelationMatrix& R = mats[mid];
    const std::int64_t pilot_n = 1500;
    double lo = 0.1, hi = 3.0;
    for (int step = 0; step < 9; ++step) {
      const double c = 0.5 * (lo + hi);
      MeanSpec ms = mean;
      ms.magnitude = c * std::sqrt(1.2 * std::log(static_cast<double>(m_tune)));
      const Eigen::VectorXd mu = ms.build(m_tune);
      const RejectCounts counts = power_cell(
          R, mu, pilot_n, cct_threshold,
          /*max_threshold=*/std::numeric_limits<double>::infinity(), root,
          stream_purpose::kPowerTune,
          static_cast<std::uint64_t>(step) << 32, workers);
      const double p = static_cast<double>(counts.cct) / static_cast<double>(pilot_n);
      if (p < 0.5) {
        lo = c;
      } else {
        hi = c;
      }
    }
    multiplier = 0.5 * (lo + hi);
  }

  PowerResult out;
  out.m_grid = m_grid;
  out.alpha = alpha;
  out.replicates = replicates;
  out.seed = seed;
  out.tuned_multiplier = multiplier;
  {
    CorrelationSpec desc = corr_template;
    desc.m = m_grid.front();
    char buf[192];
    std::snprintf(buf, sizeof buf, "power(%s, support=%g, %s-max)",
                  desc.describe().c_str(), mean.support_fraction,
                  mc_calibrated_max ? "mc" : "gumbel");
    out.scenario = buf;
  }

  for (std::size_t gi = 0; gi < m_grid.size(); ++gi) {
    const std::int64_t m = m_grid[gi];
    const CorrelationMatrix& R = mats[gi];
    MeanSpec ms = mean;
    if (tune) {
      ms.magnitude =
          multiplier * std::sqrt(1.2 * std::log(static_cast<double>(m)));
    }
    const double mag = ms.resolve_magnitude(m);
    const Eigen::VectorXd mu = ms.build(m);

    double max_threshold;
    if (mc_calibrated_max) {
      max_threshold = max_null_quantile(
          R, replicates, alpha, root,
          (static_cast<std::uint64_t>(16 + gi)) << 32, workers);
    } else {
      const GumbelNorm gn = gumbel_norm(m);
      max_threshold = gn.a + gn.b * gq;
    }

    const RejectCounts counts =
        power_cell(R, mu, replicates, cct_threshold, max_threshold, root,
                   stream_purpose::kPower,
                   static_cast<std::uint64_t>(gi) << 32, workers);
    const double p1 = static_cast<double>(counts.cct) / static_cast<double>(replicates);
    const double p2 = static_cast<double>(counts.max) / static_cast<double>(replicates);
    out.power_cct.push_back(p1);
    out.power_max.push_back(p2);
    out.stderr_joint.push_back(
        std::sqrt((p1 * (1.0 - p1) + p2 * (1.0 - p2)) /
                  static_cast<double>(replicates)));
    out.magnitudes.push_back(mag);
  }
  return out;
}

}  // namespace cct
