#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace batchts {

struct quadrature_error : std::runtime_error {
  quadrature_error(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate(estimate), error(error) {}
  double estimate;
  double error;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;   // estimated, not guaranteed
  int segments = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1] (QUADPACK dqk15 constants).
struct gk15 {
  static constexpr std::array<double, 8> xk = {
      0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
      0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
      0.2077849550078985, 0.0};
  static constexpr std::array<double, 8> wk = {
      0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
      0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
      0.2044329400752989,  0.2094821410847278};
  static constexpr std::array<double, 4> wg = {
      0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
      0.4179591836734694};

  template <typename F>
  static void apply(F& f, double lo, double hi, double& value, double& error) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    double sk = wk[7] * f(c);
    double sg = wg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
      const double fa = f(c - h * xk[i]);
      const double fb = f(c + h * xk[i]);
      sk += wk[i] * (fa + fb);
      if (i % 2 == 1) sg += wg[i / 2] * (fa + fb);
    }
    value = h * sk;
    error = std::abs(h * (sk - sg));
  }
};

}  // namespace detail

/* Globally adaptive integration: repeatedly bisect the segment with the
 * largest error estimate.  Throws quadrature_error instead of returning a
 * value that did not reach the requested tolerance within the budget. */
template <typename F>
QuadratureResult integrate(F f, double lo, double hi, double abs_tol,
                           int max_segments = 4000) {
  struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
  };

  auto make = [&f](double a, double b) {
    Segment s{a, b, 0.0, 0.0};
    detail::gk15::apply(f, a, b, s.value, s.error);
    return s;
  };

  std::priority_queue<Segment> queue;
  queue.push(make(lo, hi));
  double total_value = queue.top().value;
  double total_error = queue.top().error;
  int segments = 1;

  while (total_error > abs_tol) {
    if (segments >= max_segments) {
      throw quadrature_error(
          "quadrature did not reach tolerance " + std::to_string(abs_tol) +
              " within " + std::to_string(max_segments) +
              " segments (estimate " + std::to_string(total_value) +
              ", error " + std::to_string(total_error) + ")",
          total_value, total_error);
    }
    const Segment worst = queue.top();
    queue.pop();
    total_value -= worst.value;
    total_error -= worst.error;
    const double mid = 0.5 * (worst.lo + worst.hi);
    for (const Segment& s : {make(worst.lo, mid), make(mid, worst.hi)}) {
      total_value += s.value;
      total_error += s.error;
      queue.push(s);
    }
    ++segments;
  }
  return {total_value, total_error, segments};
}

}  // namespace batchts
