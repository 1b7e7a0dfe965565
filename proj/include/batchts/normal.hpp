#pragma once

#include <cmath>
#include <numbers>

namespace batchts {

/* Standard normal upper tail Q(d) = P(X >= d), and a log version that stays
 * finite far beyond the point where Q itself underflows.
 *
 * For d > 36 the log path switches to the divergent asymptotic expansion
 *   Q(d) = phi(d)/d * (1 - 1/d^2 + 3/d^4 - 15/d^6 + 105/d^8 - ...),
 * truncated where the terms are ~1e-13 relative.  erfc is still a normal
 * double there (it underflows near d ~ 38.5), so the two branches overlap
 * and can be cross-checked. */

inline double q_function(double delta) {
  return 0.5 * std::erfc(delta / std::numbers::sqrt2);
}

inline double normal_cdf(double z) { return q_function(-z); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double log_normal_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double log_q_function(double delta) {
  if (delta < 0.0) return std::log1p(-q_function(-delta));
  if (delta <= 36.0) return std::log(q_function(delta));
  const double d2 = delta * delta;
  const double series =
      1.0 - 1.0 / d2 + 3.0 / (d2 * d2) - 15.0 / (d2 * d2 * d2) + 105.0 / (d2 * d2 * d2 * d2);
  return -0.5 * d2 - std::log(delta) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

inline double log_normal_cdf(double z) { return log_q_function(-z); }

}  // namespace batchts
