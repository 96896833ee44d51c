#ifndef BCC_SPECIAL_HPP
#define BCC_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

// Special functions backing the samplers: regularized incomplete beta and
// gamma functions, their inverses, and the normal quantile. All inverses
// use bracketed Newton iteration on a monotone CDF, so they cannot
// diverge; accuracy is near machine precision (well inside the 1e-10
// target for the beta quantile).

namespace bcc {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta (Lentz's method).
inline double inc_beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b), the Beta(a, b) CDF.
inline double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * detail::inc_beta_cf(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * detail::inc_beta_cf(b, a, 1.0 - x) / b;
}

/// Inverse of reg_inc_beta in x: the Beta(a, b) quantile function.
inline double inv_reg_inc_beta(double a, double b, double p) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("inv_reg_inc_beta: shape parameters must be positive");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double ln_b = log_beta(a, b);
  double lo = 0.0, hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < 200; ++it) {
    const double f = reg_inc_beta(a, b, x) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double dens =
        std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - ln_b);
    double next;
    if (dens > 0.0 && std::isfinite(dens)) {
      next = x - f / dens;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - x) <= 1e-16 * (std::fabs(x) + 1e-300)) return next;
    x = next;
  }
  return x;
}

/// Regularized lower incomplete gamma function P(a, x): CDF of
/// Gamma(shape=a, rate=1).
inline double reg_inc_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("reg_inc_gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) {
    // series expansion
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // continued fraction for the upper tail Q(a, x)
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  return 1.0 - q;
}

/// Quantile of the standard normal distribution. Acklam's rational
/// approximation polished with one Halley step through erfc, giving
/// near machine precision.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("norm_quantile: p must lie strictly in (0, 1)");
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley refinement
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

/// Inverse of reg_inc_gamma_p in x: quantile of Gamma(shape=a, rate=1).
inline double inv_reg_inc_gamma_p(double a, double p) {
  if (!(a > 0.0)) throw std::domain_error("inv_reg_inc_gamma_p: shape must be positive");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  // Wilson-Hilferty starting point; a small-shape expansion when it fails.
  double x;
  {
    const double z = norm_quantile(p);
    const double t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    x = a * t * t * t;
    if (!(x > 0.0) || !std::isfinite(x))
      x = std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
    if (!(x > 0.0) || !std::isfinite(x)) x = a;
  }

  // Establish a bracket, then safeguarded Newton.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  if (reg_inc_gamma_p(a, x) >= p)
    hi = x;
  else
    lo = x;
  while (!std::isfinite(hi)) {
    x = (lo > 0.0 ? lo * 2.0 : 1.0);
    if (reg_inc_gamma_p(a, x) >= p)
      hi = x;
    else
      lo = x;
  }
  x = 0.5 * (lo + hi);
  const double lg = std::lgamma(a);
  for (int it = 0; it < 200; ++it) {
    const double f = reg_inc_gamma_p(a, x) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double dens = std::exp((a - 1.0) * std::log(x) - x - lg);
    double next;
    if (dens > 0.0 && std::isfinite(dens)) {
      next = x - f / dens;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - x) <= 1e-15 * (std::fabs(x) + 1e-300)) return next;
    x = next;
  }
  return x;
}

}  // namespace bcc

#endif
