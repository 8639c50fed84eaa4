#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cct/copulas.hpp"
#include "cct/correlation_models.hpp"

// Monte Carlo pipelines: tail-probability calibration of the Cauchy
// combination statistic against the standard Cauchy reference, null size
// checks, and the CCT-versus-MAX power comparison. All pipelines assign one
// substream per replicate keyed by the global replicate index and merge
// integer exceedance counts, so results are bit-identical for any worker
// count. Equal weights 1/m are used throughout.

namespace cct {

// A null (or alternative) generating process for a p-value vector.
struct Scenario {
  enum class Kind { CORRELATED_NORMAL, MIXED_COPULA };
  Kind kind = Kind::CORRELATED_NORMAL;
  CorrelationSpec corr;  // CORRELATED_NORMAL (carries its own m)
  CopulaSpec copula;     // MIXED_COPULA
  std::int64_t m = 1;    // dimension for MIXED_COPULA

  static Scenario correlated_normal(const CorrelationSpec& spec);
  static Scenario mixed_copula(const CopulaSpec& spec, std::int64_t m);
  std::int64_t dimension() const;
  std::string describe() const;
};

// 40 log-spaced points from the 95% Cauchy quantile (~6.314) to 1000.
std::vector<double> default_t_grid();

struct TailCalibration {
  std::vector<double> t_grid;
  std::vector<double> empirical_tail;
  std::vector<double> cauchy_tail_ref;
  std::vector<double> mc_stderr;
  std::int64_t replicates = 0;
  std::string scenario;
  std::uint64_t seed = 0;

  // columns: t, empirical, reference, stderr
  std::string to_csv() const;
  std::string to_json() const;
};

TailCalibration tail_calibration(const Scenario& scenario, std::int64_t replicates,
                                 std::uint64_t seed, int workers = 1,
                                 const std::vector<double>& t_grid = default_t_grid());

// Fraction of null replicates with CCT p-value <= alpha.
double size_check(const Scenario& scenario, double alpha, std::int64_t replicates,
                  std::uint64_t seed, int workers = 1);

struct PowerResult {
  std::vector<std::int64_t> m_grid;
  std::vector<double> power_cct;
  std::vector<double> power_max;
  // conservative joint standard error sqrt((p1(1-p1) + p2(1-p2))/N) per m,
  // for comparing the two powers on common replicates
  std::vector<double> stderr_joint;
  std::vector<double> magnitudes;  // signal magnitude used at each m
  double alpha = 0.05;
  std::int64_t replicates = 0;
  std::string scenario;
  std::uint64_t seed = 0;
  double tuned_multiplier = 1.0;  // c in magnitude = c * sqrt(1.2 log m)

  // columns: m, power_cct, power_max, stderr
  std::string to_csv() const;
  std::string to_json() const;
};

// Power of CCT and of the Gumbel-calibrated MAX test at level alpha over an
// m grid. The correlation spec's m field is overwritten per grid point; the
// model must be a formula model (not EXPLICIT). When mean.magnitude is NaN,
// the signal level is auto-tuned: magnitude = c * sqrt(1.2 log m) with c
// bisected in [0.1, 3] (9 steps, 1500 pilot replicates at the middle m) so
// the CCT power at the middle m is near 0.5. When mc_calibrated_max is set,
// the MAX rejection threshold comes from a null Monte Carlo run of the same
// size instead of the Gumbel quantile.
PowerResult power_study(const CorrelationSpec& corr_template, const MeanSpec& mean,
                        const std::vector<std::int64_t>& m_grid, double alpha,
                        std::int64_t replicates, std::uint64_t seed,
                        int workers = 1, bool mc_calibrated_max = false);

}  // namespace cct
