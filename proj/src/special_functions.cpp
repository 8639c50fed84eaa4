#include "cct/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cct {

namespace {

// Cody's CALERF coefficient tables (netlib specfun). The three rational
// approximations cover |x| <= 0.46875, 0.46875 < |x| <= 4, and x > 4.
constexpr double kErfA[5] = {3.1611237438705656, 113.864154151050156,
                             377.485237685302021, 3209.37758913846947,
                             .185777706184603153};
constexpr double kErfB[4] = {23.6012909523441209, 244.024637934444173,
                             1282.61652607737228, 2844.23683343917062};
constexpr double kErfC[9] = {.564188496988670089, 8.88314979438837594,
                             66.1191906371416295, 298.635138197400131,
                             881.95222124176909,  1712.04761263407058,
                             2051.07837782607147, 1230.33935479799725,
                             2.15311535474403846e-8};
constexpr double kErfD[8] = {15.7449261107098347, 117.693950891312499,
                             537.181101862009858, 1621.38957456669019,
                             3290.79923573345963, 4362.61909014324716,
                             3439.36767414372164, 1230.33935480374942};
constexpr double kErfP[6] = {.305326634961232344, .360344899949804439,
                             .125781726111229246, .0160837851487422766,
                             6.58749161529837803e-4, .0163153871373020978};
constexpr double kErfQ[5] = {2.56852019228982242, 1.87295284992346047,
                             .527905102951428412, .0605183413124413191,
                             .00233520497626869185};

constexpr double kErfThresh = 0.46875;
constexpr double kSqrtPiInv = 0.56418958354775628695;  // 1/sqrt(pi)
constexpr double kXNeg = -26.628;    // erfcx overflows below this
constexpr double kXSmall = 1.11e-16;
constexpr double kXBig = 26.543;     // erfc underflows above this
constexpr double kXHuge = 6.71e7;    // 1/y^2 negligible above this
constexpr double kXMax = 2.53e307;

enum class ErfKind { kErf, kErfc, kErfcx };

// exp(-y*y) computed as exp(-ysq*ysq) * exp(-del) where ysq is y rounded to
// 1/16 steps; avoids the rounding error of squaring y directly (Cody's
// "sixten" trick).
double exp_neg_square(double y) {
  double ysq = std::trunc(y * 16.0) / 16.0;
  double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del);
}

double calerf(double x, ErfKind kind) {
  const double y = std::fabs(x);
  double result;

  if (y <= kErfThresh) {
    // erf(x) by the first rational approximation
    double ysq = 0.0;
    if (y > kXSmall) ysq = y * y;
    double xnum = kErfA[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + kErfA[i]) * ysq;
      xden = (xden + kErfB[i]) * ysq;
    }
    result = x * (xnum + kErfA[3]) / (xden + kErfB[3]);
    if (kind == ErfKind::kErf) return result;
    result = 1.0 - result;
    if (kind == ErfKind::kErfcx) result *= std::exp(ysq);
    return result;
  }

  // erfc(y) for y > thresh, scaled by exp(y^2) when kind is erfcx
  if (y <= 4.0) {
    double xnum = kErfC[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + kErfC[i]) * y;
      xden = (xden + kErfD[i]) * y;
    }
    result = (xnum + kErfC[7]) / (xden + kErfD[7]);
    if (kind != ErfKind::kErfcx) result *= exp_neg_square(y);
  } else if (y >= kXBig && (kind != ErfKind::kErfcx || y >= kXMax)) {
    result = 0.0;
  } else if (y >= kXHuge) {
    result = kSqrtPiInv / y;  // only reachable for erfcx
  } else {
    double ysq = 1.0 / (y * y);
    double xnum = kErfP[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + kErfP[i]) * ysq;
      xden = (xden + kErfQ[i]) * ysq;
    }
    result = ysq * (xnum + kErfP[4]) / (xden + kErfQ[4]);
    result = (kSqrtPiInv - result) / y;
    if (kind != ErfKind::kErfcx) result *= exp_neg_square(y);
  }

  // fix up sign / reflection for negative arguments
  switch (kind) {
    case ErfKind::kErf:
      result = (0.5 - result) + 0.5;
      if (x < 0.0) result = -result;
      break;
    case ErfKind::kErfc:
      if (x < 0.0) result = 2.0 - result;
      break;
    case ErfKind::kErfcx:
      if (x < 0.0) {
        if (x < kXNeg) {
          result = std::numeric_limits<double>::infinity();
        } else {
          double ysq = std::trunc(x * 16.0) / 16.0;
          double del = (x - ysq) * (x + ysq);
          double e = std::exp(ysq * ysq) * std::exp(del);
          result = (e + e) - result;
        }
      }
      break;
  }
  return result;
}

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

// AS 241 PPND16 coefficients (Wichura 1988).
constexpr double kQA[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                           1.9715909503065514427e+3, 1.3731693765509461125e+4,
                           4.5921953931549871457e+4, 6.7265770927008700853e+4,
                           3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr double kQB[7] = {4.2313330701600911252e+1, 6.8718700749205790830e+2,
                           5.3941960214247511077e+3, 2.1213794301586595867e+4,
                           3.9307895800092710610e+4, 2.8729085735721942674e+4,
                           5.2264952788528545610e+3};
constexpr double kQC[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                           5.76949722146069140550e0,  3.64784832476320460504e0,
                           1.27045825245236838258e0,  2.41780725177450611770e-1,
                           2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kQD[7] = {2.05319162663775882187e0,  1.67638483018380384940e0,
                           6.89767334985100004550e-1, 1.48103976427480074590e-1,
                           1.51986665636164571966e-2, 5.47593808499534494600e-4,
                           1.05075007164441684324e-9};
constexpr double kQE[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                           1.78482653991729133580e0,  2.96560571828504891230e-1,
                           2.65321895265761230930e-2, 1.24266094738807843860e-3,
                           2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kQF[7] = {5.99832206555887937690e-1, 1.36929880922735805310e-1,
                           1.48753612908506148525e-2, 7.86869131145613259100e-4,
                           1.84631831751005468180e-5, 1.42151175831644588870e-7,
                           2.04426310338993978564e-15};

double ppnd_poly(const double (&num)[8], const double (&den)[7], double r) {
  double xnum = num[7];
  for (int i = 6; i >= 0; --i) xnum = xnum * r + num[i];
  double xden = den[6];
  for (int i = 5; i >= 0; --i) xden = xden * r + den[i];
  return xnum / (xden * r + 1.0);
}

}  // namespace

double erfc_cody(double x) { return calerf(x, ErfKind::kErfc); }
double erfcx_cody(double x) { return calerf(x, ErfKind::kErfcx); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double norm_cdf(double x) { return 0.5 * erfc_cody(-x / kSqrt2); }

double norm_sf(double x) { return 0.5 * erfc_cody(x / kSqrt2); }

double log_norm_sf(double x) {
  if (x < 1.0) {
    // tail is not small, take the log directly; for very negative x use
    // log1p against the opposite tail to keep relative accuracy
    if (x < -1.0) return std::log1p(-norm_sf(-x));
    return std::log(norm_sf(x));
  }
  // log(0.5 erfcx(z) exp(-z^2/2)) with z = x/sqrt(2)
  double z = x / kSqrt2;
  return std::log(0.5 * erfcx_cody(z)) - z * z;
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie strictly in (0,1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q * ppnd_poly(kQA, kQB, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double ret;
  if (r <= 5.0) {
    ret = ppnd_poly(kQC, kQD, r - 1.6);
  } else {
    ret = ppnd_poly(kQE, kQF, r - 5.0);
  }
  return q < 0.0 ? -ret : ret;
}

double cauchy_tail(double t) {
  if (std::isnan(t)) throw std::domain_error("cauchy_tail: NaN input");
  if (t > 1.0) return std::atan(1.0 / t) / kPi;
  if (t < -1.0) return 1.0 - std::atan(-1.0 / t) / kPi;
  return 0.5 - std::atan(t) / kPi;
}

double cauchy_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("cauchy_quantile: level must lie strictly in (0,1)");
  }
  if (level == 0.5) return 0.0;
  if (level > 0.5) {
    // 1 - level is exact here (Sterbenz), so the cot form keeps full
    // precision for levels near 1
    return 1.0 / std::tan(kPi * (1.0 - level));
  }
  return -1.0 / std::tan(kPi * level);
}

double gumbel_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("gumbel_quantile: level must lie strictly in (0,1)");
  }
  return -std::log(-std::log(level));
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

namespace {

// series expansion of P(a,x), valid and fast for x < a+1
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 2000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  double lg = std::lgamma(a);
  double log_pref = -x + a * std::log(x) - lg;
  return sum * std::exp(log_pref);
}

// Lentz continued fraction for Q(a,x), valid for x >= a+1
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 2000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  double log_pref = -x + a * std::log(x) - std::lgamma(a);
  return std::exp(log_pref) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || std::isnan(x)) {
    throw std::domain_error("gamma_p: requires a > 0 and finite x");
  }
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || std::isnan(x)) {
    throw std::domain_error("gamma_q: requires a > 0 and finite x");
  }
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw std::domain_error("chi2_sf: df must be positive");
  return gamma_q(0.5 * df, 0.5 * x);
}

QuantileExpansion quantile_expansion(double a, std::int64_t m) {
  if (!(a > 0.0) || m < 2) {
    throw std::domain_error("quantile_expansion: requires a > 0 and m >= 2");
  }
  if (!(a / static_cast<double>(m) < 0.5)) {
    throw std::domain_error("quantile_expansion: requires a/m < 0.5");
  }
  const double log_m = std::log(static_cast<double>(m));
  QuantileExpansion qe;
  qe.leading = std::sqrt(2.0 * log_m);
  qe.log_correction =
      -(std::log(log_m) + std::log(4.0 * kPi)) / std::sqrt(8.0 * log_m);
  qe.constant_correction = -std::log(a) / std::sqrt(2.0 * log_m);
  qe.error_order = 1.0 / log_m;
  return qe;
}

}  // namespace cct
