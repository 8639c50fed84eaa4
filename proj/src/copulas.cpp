#include "cct/copulas.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cct/special_functions.hpp"

namespace cct {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

const char* kFamilyNames[] = {"PRODUCT", "FGM",       "CUADRAS_AUGE",
                              "NORMAL",  "AMH",       "SURVIVAL"};

void check_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in [0,1]");
  }
}

void check_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error(std::string(what) + " must lie strictly in (0,1)");
  }
}

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
struct GlRule {
  std::vector<double> x, w;
};

GlRule make_gl(int n) {
  GlRule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    r.x[static_cast<std::size_t>(i)] = -z;
    r.x[static_cast<std::size_t>(n - 1 - i)] = z;
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    r.w[static_cast<std::size_t>(i)] = wi;
    r.w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
  return r;
}

const GlRule& gl96() {
  static const GlRule rule = make_gl(96);
  return rule;
}

// log of the bvn upper-tail integrand at x: phi(x) * sf((k - rho x)/s)
double bvn_log_integrand(double x, double k, double rho, double s) {
  return -0.5 * x * x - kLogSqrt2Pi + log_norm_sf((k - rho * x) / s);
}

double gl_panel(double a, double b, double lmax, double k, double rho, double s) {
  const GlRule& g = gl96();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double x = c + h * g.x[i];
    acc += g.w[i] * std::exp(bvn_log_integrand(x, k, rho, s) - lmax);
  }
  return acc * h;
}

}  // namespace

const char* copula_family_name(CopulaFamily f) {
  return kFamilyNames[static_cast<int>(f)];
}

CopulaFamily copula_family_from_name(const std::string& name) {
  std::string canon;
  for (char c : name) {
    canon += c == '-' ? '_' : static_cast<char>(std::toupper(
                                  static_cast<unsigned char>(c)));
  }
  for (int i = 0; i < 6; ++i) {
    if (canon == kFamilyNames[i]) return static_cast<CopulaFamily>(i);
  }
  throw std::invalid_argument("unknown copula family: " + name);
}

void CopulaSpec::validate() const {
  switch (family) {
    case CopulaFamily::PRODUCT:
      return;
    case CopulaFamily::FGM:
    case CopulaFamily::AMH:
      if (!(theta >= -1.0 && theta <= 1.0)) {
        throw std::domain_error(std::string(copula_family_name(family)) +
                                ": theta must lie in [-1,1]");
      }
      return;
    case CopulaFamily::CUADRAS_AUGE:
    case CopulaFamily::SURVIVAL:
      if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::domain_error(std::string(copula_family_name(family)) +
                                ": theta must lie in [0,1]");
      }
      return;
    case CopulaFamily::NORMAL:
      if (!(theta >= -0.99 && theta <= 0.99)) {
        throw std::domain_error("NORMAL: correlation must lie in [-0.99, 0.99]");
      }
      return;
  }
  throw std::domain_error("invalid copula family");
}

std::string CopulaSpec::describe() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s(theta=%g)", copula_family_name(family), theta);
  return buf;
}

double copula_cdf(const CopulaSpec& spec, double u, double v) {
  spec.validate();
  check_unit_interval(u, "u");
  check_unit_interval(v, "v");
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  const double th = spec.theta;
  switch (spec.family) {
    case CopulaFamily::PRODUCT:
      return u * v;
    case CopulaFamily::FGM:
      return u * v * (1.0 + th * (1.0 - u) * (1.0 - v));
    case CopulaFamily::CUADRAS_AUGE:
      return std::pow(std::min(u, v), th) * std::pow(u * v, 1.0 - th);
    case CopulaFamily::NORMAL:
      return bvn_cdf(norm_quantile(u), norm_quantile(v), th);
    case CopulaFamily::AMH:
      return u * v / (1.0 - th * (1.0 - u) * (1.0 - v));
    case CopulaFamily::SURVIVAL:
      return u * v * std::exp(-th * std::log(u) * std::log(v));
  }
  throw std::domain_error("invalid copula family");
}

double bvn_upper_tail(double h, double k, double rho) {
  if (!(rho >= -0.99 && rho <= 0.99)) {
    throw std::domain_error("bvn_upper_tail: correlation must lie in [-0.99, 0.99]");
  }
  if (std::isnan(h) || std::isnan(k)) {
    throw std::domain_error("bvn_upper_tail: NaN input");
  }
  // below -40 a marginal constraint is vacuous to double precision
  if (h <= -40.0 && k <= -40.0) return 1.0 - norm_cdf(h) - norm_cdf(k);
  if (h <= -40.0) return norm_sf(k);
  if (k <= -40.0) return norm_sf(h);
  if (rho == 0.0) return norm_sf(h) * norm_sf(k);

  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  // scan for the integrand peak over the effective support
  const double lo = h, hi = h + 60.0;
  const int kScan = 600;
  double lmax = -1e308;
  int imax = 0;
  std::vector<double> lf(kScan + 1);
  for (int i = 0; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    lf[static_cast<std::size_t>(i)] = bvn_log_integrand(x, k, rho, s);
    if (lf[static_cast<std::size_t>(i)] > lmax) {
      lmax = lf[static_cast<std::size_t>(i)];
      imax = i;
    }
  }
  // restrict to the region within 80 nats of the peak
  const double cutoff = lmax - 80.0;
  int ilo = imax, ihi = imax;
  while (ilo > 0 && lf[static_cast<std::size_t>(ilo - 1)] >= cutoff) --ilo;
  while (ihi < kScan && lf[static_cast<std::size_t>(ihi + 1)] >= cutoff) ++ihi;
  const double step = (hi - lo) / kScan;
  const double a = lo + step * std::max(0, ilo - 1);
  const double b = lo + step * std::min(kScan, ihi + 1);
  const double mid = std::clamp(lo + step * imax, a, b);

  double total = 0.0;
  if (mid > a) total += gl_panel(a, mid, lmax, k, rho, s);
  if (b > mid) total += gl_panel(mid, b, lmax, k, rho, s);
  if (total <= 0.0) return 0.0;
  return std::exp(lmax + std::log(total));
}

double bvn_cdf(double h, double k, double rho) {
  return bvn_upper_tail(-h, -k, rho);
}

double rectangle_prob(const CopulaSpec& spec, const Rectangle& r) {
  spec.validate();
  check_unit_interval(r.u_lo, "u_lo");
  check_unit_interval(r.u_hi, "u_hi");
  check_unit_interval(r.v_lo, "v_lo");
  check_unit_interval(r.v_hi, "v_hi");
  if (r.u_lo > r.u_hi || r.v_lo > r.v_hi) {
    throw std::invalid_argument("rectangle_prob: degenerate rectangle bounds");
  }
  if (r.u_lo == r.u_hi || r.v_lo == r.v_hi) return 0.0;

  if (spec.family == CopulaFamily::NORMAL) {
    const double rho = spec.theta;
    const bool at0_u = r.u_lo == 0.0, at1_u = r.u_hi == 1.0;
    const bool at0_v = r.v_lo == 0.0, at1_v = r.v_hi == 1.0;
    // corner rectangles go through the log-domain tail integrator; the
    // inclusion-exclusion below would cancel to 0 long before the double
    // underflow threshold
    if (at0_u && at0_v && !at1_u && !at1_v) {
      return bvn_upper_tail(-norm_quantile(r.u_hi), -norm_quantile(r.v_hi), rho);
    }
    if (at0_u && at1_v && !at1_u && !at0_v) {
      return bvn_upper_tail(-norm_quantile(r.u_hi), norm_quantile(r.v_lo), -rho);
    }
    if (at1_u && at0_v && !at0_u && !at1_v) {
      return bvn_upper_tail(norm_quantile(r.u_lo), -norm_quantile(r.v_hi), -rho);
    }
    if (at1_u && at1_v && !at0_u && !at0_v) {
      return bvn_upper_tail(norm_quantile(r.u_lo), norm_quantile(r.v_lo), rho);
    }
  }

  const double val = copula_cdf(spec, r.u_hi, r.v_hi) -
                     copula_cdf(spec, r.u_lo, r.v_hi) -
                     copula_cdf(spec, r.u_hi, r.v_lo) +
                     copula_cdf(spec, r.u_lo, r.v_lo);
  // roundoff can leave a tiny negative residue on near-degenerate cells
  return std::max(0.0, val);
}

namespace {

template <typename F>
double bisect_conditional(const F& cond_cdf, double w) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12) return mid;
    if (cond_cdf(mid) < w) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw std::runtime_error("conditional_quantile: bisection did not converge");
}

}  // namespace

double conditional_quantile(const CopulaSpec& spec, double u, double w) {
  spec.validate();
  check_open_unit(u, "u");
  check_open_unit(w, "w");
  const double th = spec.theta;
  switch (spec.family) {
    case CopulaFamily::PRODUCT:
      return w;
    case CopulaFamily::FGM: {
      // dC/du = v [1 + theta (1-2u)(1-v)] = w is quadratic in v; the stable
      // root is v = 2w / (1 + A + sqrt((1+A)^2 - 4Aw)) with A = theta(1-2u)
      const double A = th * (1.0 - 2.0 * u);
      const double b = 1.0 + A;
      const double disc = b * b - 4.0 * A * w;
      return 2.0 * w / (b + std::sqrt(disc));
    }
    case CopulaFamily::CUADRAS_AUGE: {
      // F(v|u) = (1-theta) u^{-theta} v below v = u, then an atom of mass
      // theta u^{1-theta} at v = u, then v^{1-theta} above
      if (th == 0.0) return w;
      const double upper = std::pow(u, 1.0 - th);  // F(u|u) including the atom
      const double lower = (1.0 - th) * upper;     // limit from below
      if (w <= upper && w >= lower) return u;
      if (w < lower) return w * std::pow(u, th) / (1.0 - th);
      return std::pow(w, 1.0 / (1.0 - th));
    }
    case CopulaFamily::NORMAL: {
      const double z = norm_quantile(u);
      const double s = std::sqrt((1.0 - th) * (1.0 + th));
      return norm_cdf(th * z + s * norm_quantile(w));
    }
    case CopulaFamily::AMH: {
      // F(v|u) = v (1 - theta (1-v)) / D^2 with D = 1 - theta (1-u)(1-v)
      const auto cond = [th, u](double v) {
        const double d = 1.0 - th * (1.0 - u) * (1.0 - v);
        return v * (1.0 - th * (1.0 - v)) / (d * d);
      };
      return bisect_conditional(cond, w);
    }
    case CopulaFamily::SURVIVAL: {
      // F(v|u) = v (1 - theta log v) exp(-theta log u log v)
      const double lu = std::log(u);
      const auto cond = [th, lu](double v) {
        const double lv = std::log(v);
        return v * (1.0 - th * lv) * std::exp(-th * lu * lv);
      };
      return bisect_conditional(cond, w);
    }
  }
  throw std::domain_error("invalid copula family");
}

std::pair<double, double> sample_pair(const CopulaSpec& spec, RngStream& rng) {
  const double u = rng.next_uniform();
  const double w = rng.next_uniform();
  double v = conditional_quantile(spec, u, w);
  // keep samples strictly inside (0,1); pow rounding can touch the edges
  v = std::clamp(v, 0x1.0p-54, 1.0 - 0x1.0p-53);
  return {u, v};
}

std::vector<double> mixed_copula_sample(const CopulaSpec& spec, std::int64_t m,
                                        RngStream& rng) {
  if (m < 1) throw std::invalid_argument("mixed_copula_sample: m must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(m));
  std::int64_t i = 0;
  for (; i + 1 < m; i += 2) {
    const auto [u, v] = sample_pair(spec, rng);
    out[static_cast<std::size_t>(i)] = u;
    out[static_cast<std::size_t>(i + 1)] = v;
  }
  if (i < m) out[static_cast<std::size_t>(i)] = rng.next_uniform();
  return out;
}

bool DecayReport::joint_strictly_decreasing() const {
  for (std::size_t i = 1; i < scaled_joint.size(); ++i) {
    if (!(scaled_joint[i] < scaled_joint[i - 1])) return false;
  }
  return true;
}

bool DecayReport::cross_strictly_decreasing() const {
  for (std::size_t i = 1; i < scaled_cross.size(); ++i) {
    if (!(scaled_cross[i] < scaled_cross[i - 1])) return false;
  }
  return true;
}

std::string DecayReport::to_csv() const {
  std::string out = "t,m,delta_t,p_joint,p_cross,scaled_joint,scaled_cross\n";
  char buf[256];
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  t_grid[i], static_cast<long long>(m_values[i]), delta_t[i],
                  p_joint[i], p_cross[i], scaled_joint[i], scaled_cross[i]);
    out += buf;
  }
  return out;
}

DecayReport condition_decay_check(const CopulaSpec& spec, double w_i, double w_j,
                                  const MRule& rule,
                                  const std::vector<double>& t_grid) {
  spec.validate();
  if (!(w_i > 0.0) || !(w_j > 0.0)) {
    throw std::invalid_argument("condition_decay_check: weights must be positive");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("condition_decay_check: empty t grid");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 1.0)) {
      throw std::invalid_argument("condition_decay_check: grid must have t > 1");
    }
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument("condition_decay_check: grid must increase");
    }
  }

  const bool is_normal = spec.family == CopulaFamily::NORMAL;
  DecayReport rep;
  rep.t_grid = t_grid;
  double delta_exponent;  // delta_t = t^{delta_exponent}
  double gamma_eff = 0.0;
  char sched[128];

  if (rule.regime == MRegime::FIXED) {
    if (rule.m < 2) {
      throw std::invalid_argument("condition_decay_check: fixed m must be >= 2");
    }
    if (is_normal) {
      const double beta = std::isnan(rule.beta)
                              ? 0.5 * (1.0 + std::fabs(spec.theta))
                              : rule.beta;
      if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("condition_decay_check: beta must lie in (0,1)");
      }
      delta_exponent = beta - 1.0;
      std::snprintf(sched, sizeof sched, "delta_t = t^(beta-1), beta = %g", beta);
    } else {
      delta_exponent = -0.5;
      std::snprintf(sched, sizeof sched, "delta_t = t^(-1/2)");
    }
  } else {
    if (is_normal) {
      if (std::isnan(rule.beta)) {
        throw std::invalid_argument(
            "condition_decay_check: divergent NORMAL regime requires beta");
      }
      const double rho = spec.theta;
      gamma_eff = 2.0 * rule.beta / (1.0 + rho) - 1.0;
      if (!(gamma_eff > 0.0 && gamma_eff < 1.0)) {
        throw std::invalid_argument(
            "condition_decay_check: beta implies gamma outside (0,1)");
      }
      delta_exponent = rule.beta - 1.0;
      std::snprintf(sched, sizeof sched,
                    "delta_t = t^(beta-1), beta = %g, gamma = %g", rule.beta,
                    gamma_eff);
    } else {
      gamma_eff = rule.gamma;
      if (!(gamma_eff > 0.0 && gamma_eff < 1.0)) {
        throw std::invalid_argument(
            "condition_decay_check: gamma must lie in (0,1)");
      }
      delta_exponent = 0.5 * (gamma_eff - 1.0);
      std::snprintf(sched, sizeof sched, "delta_t = t^((gamma-1)/2), gamma = %g",
                    gamma_eff);
    }
  }
  rep.gamma = gamma_eff;
  rep.delta_schedule = sched;

  for (double t : t_grid) {
    const double delta = std::pow(t, delta_exponent);
    std::int64_t m_t;
    double a_i, a_j;
    if (rule.regime == MRegime::FIXED) {
      m_t = rule.m;
      a_i = w_i * static_cast<double>(m_t) / kPi;
      a_j = w_j * static_cast<double>(m_t) / kPi;
    } else {
      // weights are the scale-free products omega * m in this regime
      m_t = std::max<std::int64_t>(
          2, static_cast<std::int64_t>(std::floor(std::pow(t, 0.5 * gamma_eff))));
      a_i = w_i / kPi;
      a_j = w_j / kPi;
    }
    const double u_joint_i = a_i / t;
    const double u_joint_j = a_j / (delta * t);
    const double u_cross_i = a_i / ((1.0 + delta) * t);
    if (!(u_joint_i < 1.0 && u_joint_j < 1.0 && u_cross_i < 1.0)) {
      throw std::invalid_argument(
          "condition_decay_check: rectangle bound >= 1, grid t too small for "
          "the requested weights");
    }
    const double p_joint =
        rectangle_prob(spec, Rectangle{0.0, u_joint_i, 0.0, u_joint_j});
    const double p_cross =
        rectangle_prob(spec, Rectangle{0.0, u_cross_i, 1.0 - u_joint_j, 1.0});
    const double scale = rule.regime == MRegime::FIXED
                             ? t
                             : std::pow(t, 1.0 + gamma_eff);
    rep.m_values.push_back(m_t);
    rep.delta_t.push_back(delta);
    rep.p_joint.push_back(p_joint);
    rep.p_cross.push_back(p_cross);
    rep.scaled_joint.push_back(scale * p_joint);
    rep.scaled_cross.push_back(scale * p_cross);
  }
  return rep;
}

}  // namespace cct
