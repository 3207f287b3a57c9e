#pragma once

#include <cmath>
#include <numbers>

namespace gpest {

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779;  // 1/sqrt(2*pi)

/// Standard normal density phi(z).
inline double normal_pdf(double z) {
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// Standard normal CDF Phi(z).
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Upper tail Q(z) = 1 - Phi(z), computed without cancellation for large z.
inline double normal_tail(double z) {
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// log Phi(z), stable over the whole double range.
///
/// erfc underflows near z = -37.5; below -36 we switch to the Mills-ratio
/// asymptotic Q(x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
/// For z >= 0, log1p(-Q(z)) keeps the last bits that log(Phi) loses.
inline double log_normal_cdf(double z) {
  if (z < -36.0) {
    const double x = -z;
    const double x2 = x * x;
    const double series =
        (-1.0 + (3.0 - (15.0 - 105.0 / x2) / x2) / x2) / x2;
    return -0.5 * x2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(x) +
           std::log1p(series);
  }
  if (z >= 0.0) {
    return std::log1p(-normal_tail(z));
  }
  return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

/// log Q(z) = log(1 - Phi(z)).
inline double log_normal_tail(double z) { return log_normal_cdf(-z); }

}  // namespace gpest
