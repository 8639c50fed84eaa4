#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cct/rng.hpp"

// Six bivariate copulas on [0,1]^2, their conditional-inversion samplers,
// and the numerical decay certificates for the joint/cross tail events that
// control the Cauchy tail approximation under dependence.

namespace cct {

enum class CopulaFamily { PRODUCT, FGM, CUADRAS_AUGE, NORMAL, AMH, SURVIVAL };

const char* copula_family_name(CopulaFamily f);
CopulaFamily copula_family_from_name(const std::string& name);

// Parameter ranges: FGM and AMH take theta in [-1,1]; CUADRAS_AUGE and
// SURVIVAL take theta in [0,1]; NORMAL takes the correlation in
// [-0.99, 0.99]; PRODUCT ignores theta.
struct CopulaSpec {
  CopulaFamily family = CopulaFamily::PRODUCT;
  double theta = 0.0;
  void validate() const;
  std::string describe() const;
};

double copula_cdf(const CopulaSpec& spec, double u, double v);

struct Rectangle {
  double u_lo, u_hi, v_lo, v_hi;
};
// P((U,V) in rectangle) by inclusion-exclusion, clipped to zero when roundoff
// produces a value in [-1e-12, 0). For the NORMAL family, corner rectangles
// (two sides pinned at 0 or 1) are routed through the log-domain tail
// integrator so extreme-tail probabilities keep relative precision instead
// of cancelling to zero.
double rectangle_prob(const CopulaSpec& spec, const Rectangle& rect);

// Inverse of the conditional CDF F(v | U = u) at w, for sampling by
// conditional inversion. PRODUCT, FGM, CUADRAS_AUGE and NORMAL invert in
// closed form; AMH and SURVIVAL bisect to |dv| <= 1e-12 (at most 200 steps,
// more is an internal error).
double conditional_quantile(const CopulaSpec& spec, double u, double w);

// One (U,V) pair by conditional inversion from two uniforms.
std::pair<double, double> sample_pair(const CopulaSpec& spec, RngStream& rng);

// Uniform margin vector of length m where consecutive pairs (1,2), (3,4), ...
// are coupled by the given copula and any trailing odd coordinate is an
// independent uniform. This is the mixed-copula null model used by the
// simulation studies (FGM and AMH are the primary families there).
std::vector<double> mixed_copula_sample(const CopulaSpec& spec, std::int64_t m,
                                        RngStream& rng);

// Bivariate standard normal tail P(X > h, Y > k) with correlation rho,
// evaluated as a log-domain Gauss-Legendre quadrature over the conditional
// form, so corner probabilities far below the double underflow threshold of
// the naive inclusion-exclusion path are still computed to full relative
// precision. bvn_cdf is the lower orthant P(X <= h, Y <= k).
double bvn_upper_tail(double h, double k, double rho);
double bvn_cdf(double h, double k, double rho);

// How the number of combined tests behaves along the t grid of a decay
// certificate. FIXED holds m constant. DIVERGENT grows m(t) = max(2,
// floor(t^{gamma/2})) with gamma in (0,1); the weight arguments are then the
// scale-free products omega_i * m, which the divergent schedule holds
// constant. For the NORMAL family the slack schedule comes from a tail
// exponent beta via delta_t = t^{beta-1}: the fixed regime defaults to
// beta = (1 + |rho|)/2 when beta is unset, and the divergent regime derives
// gamma = 2*beta/(1+rho) - 1 from the supplied beta.
enum class MRegime { FIXED, DIVERGENT };
struct MRule {
  MRegime regime = MRegime::FIXED;
  std::int64_t m = 10;
  double gamma = 0.5;
  double beta = std::numeric_limits<double>::quiet_NaN();

  static MRule fixed(std::int64_t m_fixed) {
    MRule r;
    r.regime = MRegime::FIXED;
    r.m = m_fixed;
    return r;
  }
  static MRule divergent(double gamma_value) {
    MRule r;
    r.regime = MRegime::DIVERGENT;
    r.gamma = gamma_value;
    return r;
  }
};

// Decay certificate for the two tail events behind the Cauchy approximation:
//   joint: P(0 < p_i < a_i/t,            0 < p_j < a_j/(delta_t t))
//   cross: P(0 < p_i < a_i/((1+delta_t)t),  1 - a_j/(delta_t t) < p_j < 1)
// with a_i = omega_i m / pi. The fixed regime reports t * P, the divergent
// regime t^{1+gamma} * P; both scaled sequences must decay to zero for the
// approximation to hold, and the acceptance checks assert strict decrease
// over a log-spaced grid.
struct DecayReport {
  std::vector<double> t_grid;
  std::vector<std::int64_t> m_values;
  std::vector<double> delta_t;
  std::vector<double> p_joint;
  std::vector<double> p_cross;
  std::vector<double> scaled_joint;
  std::vector<double> scaled_cross;
  double gamma = 0.0;  // 0 in the fixed regime
  std::string delta_schedule;

  bool joint_strictly_decreasing() const;
  bool cross_strictly_decreasing() const;
  // columns: t, m, delta_t, p_joint, p_cross, scaled_joint, scaled_cross
  std::string to_csv() const;
};

DecayReport condition_decay_check(const CopulaSpec& spec, double w_i, double w_j,
                                  const MRule& rule,
                                  const std::vector<double>& t_grid);

}  // namespace cct
