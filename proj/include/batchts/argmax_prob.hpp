#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "batchts/normal.hpp"
#include "batchts/quadrature.hpp"
#include "batchts/rng.hpp"

namespace batchts {

/* P(arm i attains the max) for independent Gaussians theta_j ~ N(m_j, v_j):
 *
 *   p_i = Int phi((x - m_i)/s_i)/s_i * prod_{j != i} Phi((x - m_j)/s_j) dx
 *
 * Three routes that cross-check each other: the two-arm closed form
 * p_2 = Q((m_1 - m_2)/sqrt(v_1 + v_2)), adaptive quadrature for any I, and
 * Monte Carlo argmax frequencies.  A log-space quadrature path keeps the
 * per-arm log-probabilities finite when the linear values underflow. */

struct GaussianProfile {
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t size() const { return means.size(); }

  void validate() const {
    if (means.size() != variances.size() || means.size() < 2)
      throw std::invalid_argument("profile needs >= 2 (mean, variance) pairs");
    for (double m : means)
      if (!std::isfinite(m)) throw std::invalid_argument("profile mean not finite");
    for (double v : variances)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("profile variance must be finite and > 0");
  }
};

struct ProbVector {
  enum class Method { closed_form, quadrature, monte_carlo };

  std::vector<double> probs;
  std::vector<double> log_probs;  // natural log, finite far below double range
  double abs_error = 0.0;
  Method method = Method::closed_form;
};

// Second-largest entry by value (the runner-up selection probability).
inline double second_largest(std::span<const double> probs) {
  if (probs.size() < 2) throw std::invalid_argument("need >= 2 probabilities");
  double best = -std::numeric_limits<double>::infinity();
  double second = best;
  for (double p : probs) {
    if (p > best) {
      second = best;
      best = p;
    } else if (p > second) {
      second = p;
    }
  }
  return second;
}

inline ProbVector prob_two_arms(const GaussianProfile& profile) {
  profile.validate();
  if (profile.size() != 2)
    throw std::invalid_argument("closed form is for exactly 2 arms");
  const double d = (profile.means[0] - profile.means[1]) /
                   std::sqrt(profile.variances[0] + profile.variances[1]);
  ProbVector out;
  out.method = ProbVector::Method::closed_form;
  out.probs = {q_function(-d), q_function(d)};
  out.log_probs = {log_q_function(-d), log_q_function(d)};
  out.abs_error = 0.0;
  return out;
}

namespace detail {

struct ProfileBounds {
  double lo, hi;
};

inline ProfileBounds integration_bounds(const GaussianProfile& p) {
  double lo = p.means[0], hi = p.means[0], smax = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    lo = std::min(lo, p.means[j]);
    hi = std::max(hi, p.means[j]);
    smax = std::max(smax, std::sqrt(p.variances[j]));
  }
  return {lo - 10.0 * smax, hi + 10.0 * smax};
}

/* Segment seeds at each mean +/- a few sigma so that an arm much narrower
 * than the integration range cannot slip between the initial Kronrod nodes
 * and be missed by the refinement loop. */
inline std::vector<double> seed_points(const GaussianProfile& p, double lo, double hi,
                                       double extra_center = std::numeric_limits<double>::quiet_NaN(),
                                       double extra_width = 0.0) {
  static constexpr double scales[] = {-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0};
  std::vector<double> pts{lo, hi};
  auto add = [&](double center, double width) {
    for (double s : scales) {
      const double x = center + s * width;
      if (x > lo && x < hi) pts.push_back(x);
    }
  };
  for (std::size_t j = 0; j < p.size(); ++j)
    add(p.means[j], std::sqrt(p.variances[j]));
  if (!std::isnan(extra_center)) add(extra_center, extra_width);
  std::sort(pts.begin(), pts.end());
  const double min_gap = 1e-12 * (hi - lo);
  std::vector<double> out;
  for (double x : pts)
    if (out.empty() || x - out.back() > min_gap) out.push_back(x);
  return out;
}

template <typename F>
QuadratureResult integrate_seeded(F f, const std::vector<double>& pts, double abs_tol,
                                  int max_segments = 4000) {
  QuadratureResult total;
  const double piece_tol = abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const QuadratureResult r = integrate(f, pts[k], pts[k + 1], piece_tol, max_segments);
    total.value += r.value;
    total.abs_error += r.abs_error;
    total.segments += r.segments;
  }
  return total;
}

// Log of the integrand for coordinate i, concave in x.
inline double log_integrand(const GaussianProfile& p, std::size_t i, double x) {
  const double si = std::sqrt(p.variances[i]);
  double l = log_normal_pdf((x - p.means[i]) / si) - std::log(si);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j == i) continue;
    l += log_normal_cdf((x - p.means[j]) / std::sqrt(p.variances[j]));
  }
  return l;
}

inline double log_prob_one_arm(const GaussianProfile& p, std::size_t i, double abs_tol) {
  const auto [lo, hi] = integration_bounds(p);
  // Ternary search for the peak of the concave log-integrand.
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > 1e-14 * (hi - lo); ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (log_integrand(p, i, m1) < log_integrand(p, i, m2))
      a = m1;
    else
      b = m2;
  }
  const double x_star = 0.5 * (a + b);
  const double l_star = log_integrand(p, i, x_star);
  double inv_width_sq = 0.0;
  for (double v : p.variances) inv_width_sq += 1.0 / v;
  const double width = 1.0 / std::sqrt(inv_width_sq);
  const auto pts = seed_points(p, lo, hi, x_star, width);
  const QuadratureResult r = integrate_seeded(
      [&](double x) { return std::exp(log_integrand(p, i, x) - l_star); }, pts, abs_tol);
  return l_star + std::log(r.value);
}

}  // namespace detail

inline ProbVector prob_quadrature(const GaussianProfile& profile, double abs_tol = 1e-10) {
  profile.validate();
  ProbVector out;
  out.method = ProbVector::Method::quadrature;
  const auto [lo, hi] = detail::integration_bounds(profile);
  const auto pts = detail::seed_points(profile, lo, hi);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double si = std::sqrt(profile.variances[i]);
    auto f = [&, i](double x) {
      double g = normal_pdf((x - profile.means[i]) / si) / si;
      for (std::size_t j = 0; j < profile.size(); ++j) {
        if (j == i) continue;
        g *= normal_cdf((x - profile.means[j]) / std::sqrt(profile.variances[j]));
      }
      return g;
    };
    const QuadratureResult r = detail::integrate_seeded(f, pts, abs_tol);
    out.probs.push_back(r.value);
    out.abs_error = std::max(out.abs_error, r.abs_error);
    out.log_probs.push_back(detail::log_prob_one_arm(profile, i, abs_tol));
  }
  return out;
}

inline ProbVector prob_monte_carlo(const GaussianProfile& profile, std::int64_t samples,
                                   RngStream& rng) {
  profile.validate();
  if (samples < 1) throw std::invalid_argument("need >= 1 Monte Carlo sample");
  const std::size_t n = profile.size();
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(profile.variances[j]);
  std::vector<std::int64_t> counts(n, 0);
  for (std::int64_t s = 0; s < samples; ++s) {
    std::size_t best = 0;
    double best_value = profile.means[0] + sigma[0] * rng.normal();
    for (std::size_t j = 1; j < n; ++j) {
      const double value = profile.means[j] + sigma[j] * rng.normal();
      if (value > best_value) {  // ties keep the lowest index
        best_value = value;
        best = j;
      }
    }
    ++counts[best];
  }
  ProbVector out;
  out.method = ProbVector::Method::monte_carlo;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = static_cast<double>(counts[j]) / static_cast<double>(samples);
    out.probs.push_back(p);
    out.log_probs.push_back(std::log(p));
    out.abs_error =
        std::max(out.abs_error, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)));
  }
  return out;
}

struct ProbMethod {
  enum class Kind { automatic, closed_form, quadrature, monte_carlo };
  Kind kind = Kind::automatic;
  double quad_tol = 1e-10;
  std::int64_t mc_samples = 100000;
};

/* Route a profile to a method.  "automatic" means the exact route: the
 * closed form when there are two arms, quadrature otherwise.  Monte Carlo
 * consumes draws from the supplied stream. */
inline ProbVector arm_max_probabilities(const GaussianProfile& profile,
                                        const ProbMethod& method, RngStream* mc_rng = nullptr) {
  switch (method.kind) {
    case ProbMethod::Kind::closed_form:
      return prob_two_arms(profile);
    case ProbMethod::Kind::quadrature:
      return prob_quadrature(profile, method.quad_tol);
    case ProbMethod::Kind::monte_carlo:
      if (mc_rng == nullptr)
        throw std::invalid_argument("Monte Carlo probabilities need an RNG stream");
      return prob_monte_carlo(profile, method.mc_samples, *mc_rng);
    case ProbMethod::Kind::automatic:
    default:
      return profile.size() == 2 ? prob_two_arms(profile)
                                 : prob_quadrature(profile, method.quad_tol);
  }
}

}  // namespace batchts
