#pragma once

#include <cstdint>

// Scalar special functions used throughout the library: normal CDF/quantile,
// Cauchy tail and quantile, Gumbel quantile, regularized incomplete gamma,
// and the extreme-quantile expansion used by the max-type calibration.
//
// Accuracy targets: norm_cdf absolute error <= 1e-15 for |x| <= 8 and
// relative error <= 1e-12 in the tails; norm_quantile round-trips through
// norm_cdf to 1e-12 over [1e-300, 1 - 1e-16]; cauchy_tail and cauchy_quantile
// are exact inverses to 1e-10 on [1e-6, 1 - 1e-6].

namespace cct {

inline constexpr double kPi = 3.14159265358979323846;

// erfc and scaled erfc exp(x^2) erfc(x), Cody's CALERF rational
// approximations (W. J. Cody, "Rational Chebyshev approximation for the
// error function", Math. Comp. 23 (1969)). Max relative error ~1e-16.
double erfc_cody(double x);
double erfcx_cody(double x);

double norm_pdf(double x);
double norm_cdf(double x);
// Upper tail P(Z > x), accurate down to the smallest normal double.
double norm_sf(double x);
// log of the upper tail, finite for x up to ~38.6 (beyond, the tail
// underflows double but the log stays representable).
double log_norm_sf(double x);

// Inverse normal CDF, Wichura's algorithm AS 241 (PPND16).
// Throws std::domain_error for p outside (0,1).
double norm_quantile(double p);

// Standard Cauchy upper tail P(X > t). Uses arctan(1/t) for |t| > 1 so the
// result keeps full relative precision when t is large.
double cauchy_tail(double t);
// Standard Cauchy quantile, the exact inverse of 1 - cauchy_tail.
// cauchy_quantile(1 - alpha) = cot(pi * alpha) for alpha in (0, 0.5).
double cauchy_quantile(double level);

// Standard Gumbel quantile -log(-log(level)) and CDF exp(-exp(-x)).
double gumbel_quantile(double level);
double gumbel_cdf(double x);

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// series expansion below a+1 and Lentz continued fraction above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
// Chi-square upper tail, Q(df/2, x/2).
double chi2_sf(double x, double df);

// Four-term expansion of the extreme normal quantile norm_quantile(1 - a/m)
// for large m:
//
//   sqrt(2 log m) - (log log m + log 4pi) / sqrt(8 log m) - log(a) / sqrt(2 log m)
//
// with remainder O(1/log m). Requires a > 0, m >= 2 and a/m < 0.5.
struct QuantileExpansion {
  double leading;              // sqrt(2 log m)
  double log_correction;       // -(log log m + log 4pi) / sqrt(8 log m)
  double constant_correction;  // -log(a) / sqrt(2 log m)
  double error_order;          // 1 / log m
  double value() const { return leading + log_correction + constant_correction; }
};
QuantileExpansion quantile_expansion(double a, std::int64_t m);

}  // namespace cct
