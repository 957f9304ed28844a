// gamma.hpp - log-gamma, regularized incomplete gamma functions, and the
// upper-tail quantile inverse used for detection-threshold calibration.
//
// Conventions: P(a,x) is the regularized lower incomplete gamma function
// gamma(a,x)/Gamma(a), Q(a,x) = 1 - P(a,x). GammaLaw carries a shape/rate
// pair, so its CDF at x is P(shape, rate*x).

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ppt {

/// Thrown when an iterative numerical scheme fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr int kMaxGammaIter = 10000;
inline constexpr double kGammaTol = 1e-15;

// Series expansion of P(a,x); converges fastest for x < a+1.
inline double lower_gamma_series(double a, double x, double log_gamma_a) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxGammaIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaTol) {
      return sum * std::exp(a * std::log(x) - x - log_gamma_a);
    }
  }
  throw ConvergenceError("lower incomplete gamma series did not converge (a=" +
                         std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

// Modified Lentz evaluation of the continued fraction for Q(a,x); the
// preferred branch for x >= a+1.
inline double upper_gamma_cont_frac(double a, double x, double log_gamma_a) {
  constexpr double tiny =
      std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxGammaIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) <= kGammaTol) {
      return std::exp(a * std::log(x) - x - log_gamma_a) * h;
    }
  }
  throw ConvergenceError("upper incomplete gamma continued fraction did not converge (a=" +
                         std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

// Lower tail of the standard normal, inverted (Acklam's rational
// approximation, |rel err| < 1.2e-9). Only used to seed the gamma quantile
// search; the safeguarded Newton iteration removes the seed error.
inline double inverse_normal_cdf(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

/// Natural log of the gamma function for a > 0.
inline double log_gamma(double a) {
  if (!(a > 0.0)) {
    throw std::domain_error("log_gamma requires a > 0");
  }
  // 14-term Lanczos-type rational approximation (g = 671/128).
  static constexpr double cof[14] = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   0.339946499848118887e-4, 0.465236289270485756e-4,
      -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
      0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
      -0.261908384015814087e-4, 0.368991826595316234e-5};
  double y = a;
  double tmp = a + 5.24218750000000000;
  tmp = (a + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (const double coeff : cof) {
    ser += coeff / ++y;
  }
  return tmp + std::log(2.5066282746310005 * ser / a);
}

/// Regularized lower incomplete gamma function P(a,x), a > 0, x >= 0.
inline double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0)) {
    throw std::domain_error("reg_lower_gamma requires a > 0");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("reg_lower_gamma requires x >= 0");
  }
  if (x == 0.0) return 0.0;
  const double lg = log_gamma(a);
  if (x < a + 1.0) {
    return detail::lower_gamma_series(a, x, lg);
  }
  return 1.0 - detail::upper_gamma_cont_frac(a, x, lg);
}

/// Regularized upper incomplete gamma function Q(a,x) = 1 - P(a,x).
inline double reg_upper_gamma(double a, double x) {
  if (!(a > 0.0)) {
    throw std::domain_error("reg_upper_gamma requires a > 0");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("reg_upper_gamma requires x >= 0");
  }
  if (x == 0.0) return 1.0;
  const double lg = log_gamma(a);
  if (x < a + 1.0) {
    return 1.0 - detail::lower_gamma_series(a, x, lg);
  }
  return detail::upper_gamma_cont_frac(a, x, lg);
}

/// Solves Q(a, x) = p_tail for x, with 0 < p_tail < 1.
///
/// Seeded by the Wilson-Hilferty cube-root normal approximation, then
/// polished by Newton steps on Q with a bisection safeguard that keeps the
/// iterate inside a verified bracket. The result satisfies
/// |Q(a, x) - p_tail| <= 1e-9 * p_tail.
inline double inv_reg_upper_gamma(double a, double p_tail) {
  if (!(a > 0.0)) {
    throw std::domain_error("inv_reg_upper_gamma requires a > 0");
  }
  if (!(p_tail > 0.0 && p_tail < 1.0)) {
    throw std::domain_error("inv_reg_upper_gamma requires p_tail in (0,1)");
  }
  const double lg = log_gamma(a);

  // Wilson-Hilferty seed; falls back to the small-x power-law inverse when
  // the cube goes nonpositive (large tails at small shape).
  const double z = detail::inverse_normal_cdf(1.0 - p_tail);
  const double wh = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
  double x = (wh > 0.0) ? a * wh * wh * wh
                        : std::exp((std::log1p(-p_tail) + log_gamma(a + 1.0)) / a);
  x = std::max(x, std::numeric_limits<double>::min());

  // Grow a bracket [lo, hi] with Q(lo) >= p_tail >= Q(hi).
  double lo = x, hi = x;
  if (reg_upper_gamma(a, x) > p_tail) {
    for (int i = 0; i < 400 && reg_upper_gamma(a, hi) > p_tail; ++i) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    for (int i = 0; i < 400 && reg_upper_gamma(a, lo) < p_tail; ++i) {
      hi = lo;
      lo *= 0.5;
    }
  }

  x = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    const double f = reg_upper_gamma(a, x) - p_tail;
    if (f > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::abs(f) <= 1e-13 * p_tail) {
      break;
    }
    const double log_pdf = (a - 1.0) * std::log(x) - x - lg;
    double next = x;
    if (log_pdf > -700.0) {
      next = x + f / std::exp(log_pdf);  // Newton on Q (Q' = -pdf)
    }
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);  // bisect when Newton leaves the bracket
    }
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
      break;  // iterate resolved to machine precision
    }
    x = next;
  }
  const double residual = std::abs(reg_upper_gamma(a, x) - p_tail);
  if (residual > 1e-9 * p_tail) {
    throw ConvergenceError("inv_reg_upper_gamma did not converge (a=" + std::to_string(a) +
                           ", p_tail=" + std::to_string(p_tail) + ")");
  }
  return x;
}

/// Gamma distribution in shape/rate form: mean = shape/rate,
/// variance = shape/rate^2.
struct GammaLaw {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

/// CDF of a GammaLaw: F(x; shape, rate) = P(shape, rate*x).
inline double gamma_cdf(const GammaLaw& law, double x) {
  if (!(law.shape > 0.0) || !(law.rate > 0.0)) {
    throw std::domain_error("gamma_cdf requires shape > 0 and rate > 0");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("gamma_cdf requires x >= 0");
  }
  return reg_lower_gamma(law.shape, law.rate * x);
}

}  // namespace ppt
