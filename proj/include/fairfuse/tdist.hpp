#pragma once

#include <cmath>
#include <limits>

#include "fairfuse/errors.hpp"

// Student-t tail probabilities via the regularized incomplete beta function.
// Self-contained on purpose: no statistics library dependency.

namespace fairfuse {

namespace detail {

// Continued fraction for the incomplete beta function, modified Lentz
// algorithm. Converges quickly for x < (a+1)/(a+b+2).
inline double betacf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b), a,b > 0, x in [0, 1].
inline double betainc_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw NumericError("betainc_reg: a, b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw NumericError("betainc_reg: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::betacf(a, b, x) / a;
  }
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// P(T <= t) for Student's t with nu degrees of freedom.
inline double student_t_cdf(double t, double nu) {
  if (nu <= 0.0) throw NumericError("student_t_cdf: nu must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double half_tail = 0.5 * betainc_reg(nu / 2.0, 0.5, nu / (nu + t * t));
  return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

/// Two-sided p-value: P(|T| >= |t|) under the null.
inline double student_t_two_sided_p(double t, double nu) {
  if (std::isinf(t)) return 0.0;
  return betainc_reg(nu / 2.0, 0.5, nu / (nu + t * t));
}

}  // namespace fairfuse
