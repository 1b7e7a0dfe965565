#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "batchts/sampler.hpp"

namespace batchts {

/* Everything a schedule may look at when choosing the next endpoint: data
 * measurable at the last closed boundary, nothing from inside open batches. */
struct ScheduleContext {
  std::int64_t batch = 0;          // index j of the batch being opened, 1-based
  std::int64_t prev_endpoint = 0;  // T_{j-1}, 0 before the first batch
  std::int64_t horizon = 0;
  std::size_t num_arms = 0;
  // Selection probabilities P(A = i | data through T_{j-1}), natural-log form
  // alongside.  Null for schedules that do not ask for them.
  const std::vector<double>* probs = nullptr;
  const std::vector<double>* log_probs = nullptr;
  const std::vector<ArmPosterior>* snapshot = nullptr;
  const std::vector<std::int64_t>* endpoints = nullptr;
};

// With no data yet the posteriors are exchangeable, so the runner-up
// selection probability is exactly 1/I and the first adaptive batch has
// length I (one pull per arm in expectation).
inline std::int64_t ipase_first_batch(std::size_t num_arms) {
  return static_cast<std::int64_t>(num_arms);
}

// Length of an adaptive batch given the runner-up selection probability at
// the previous boundary. The guard is evaluated in log space so a runner-up
// too unlikely to be seen within the remaining horizon sends the batch to
// the end without ever exponentiating an underflowing value. Otherwise the
// reciprocal is taken on the linear value when it is representable: the
// exp(-log p) round trip can land on the wrong side of an integer (for
// p = 0.25 the reciprocal is exactly 4 but the round trip may floor to 3).
inline std::int64_t ipase_batch_length(double p2, double log_p2,
                                       std::int64_t remaining) {
  if (remaining < 1) throw std::logic_error("no budget left for a batch");
  if (!(log_p2 > -std::log(static_cast<double>(remaining)))) return remaining;
  const double inverse = p2 > 1e-300 ? 1.0 / p2 : std::exp(-log_p2);
  const auto len = static_cast<std::int64_t>(std::floor(inverse));
  return std::clamp<std::int64_t>(len, std::int64_t{1}, remaining);
}

class BatchSchedule {
 public:
  enum class Kind { per_step, constant, polynomial, geometric, explicit_list, adversarial, ipase };

  using Hook = std::function<std::int64_t(const ScheduleContext&)>;

  static BatchSchedule per_step() { return BatchSchedule(Kind::per_step); }

  static BatchSchedule constant(std::int64_t size) {
    if (size < 1) throw std::invalid_argument("constant batch size must be >= 1");
    BatchSchedule s(Kind::constant);
    s.size_ = size;
    return s;
  }

  static BatchSchedule polynomial(double p) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("polynomial exponent must be finite and > 0");
    BatchSchedule s(Kind::polynomial);
    s.exponent_ = p;
    return s;
  }

  static BatchSchedule geometric(double ratio) {
    if (!(ratio > 1.0) || !std::isfinite(ratio))
      throw std::invalid_argument("geometric ratio must be finite and > 1");
    BatchSchedule s(Kind::geometric);
    s.ratio_ = ratio;
    return s;
  }

  static BatchSchedule explicit_list(std::vector<std::int64_t> endpoints) {
    if (endpoints.empty()) throw std::invalid_argument("empty endpoint list");
    std::int64_t prev = 0;
    for (std::int64_t t : endpoints) {
      if (t <= prev) throw std::invalid_argument("endpoints must be strictly increasing");
      prev = t;
    }
    BatchSchedule s(Kind::explicit_list);
    s.list_ = std::move(endpoints);
    return s;
  }

  static BatchSchedule adversarial(Hook hook) {
    if (!hook) throw std::invalid_argument("null schedule hook");
    BatchSchedule s(Kind::adversarial);
    s.hook_ = std::move(hook);
    return s;
  }

  static BatchSchedule ipase() { return BatchSchedule(Kind::ipase); }

  Kind kind() const { return kind_; }
  // Adaptive schedules need the boundary selection probabilities.
  bool wants_probs() const { return kind_ == Kind::ipase || kind_ == Kind::adversarial; }

  double polynomial_exponent() const { return exponent_; }
  double geometric_ratio() const { return ratio_; }
  std::int64_t constant_size() const { return size_; }

  // Endpoint of the batch described by ctx; always in (prev_endpoint, horizon].
  std::int64_t next_endpoint(const ScheduleContext& ctx) {
    if (ctx.horizon <= ctx.prev_endpoint) throw std::logic_error("horizon already reached");
    std::int64_t t = 0;
    switch (kind_) {
      case Kind::per_step:
        t = ctx.prev_endpoint + 1;
        break;
      case Kind::constant:
        t = ctx.prev_endpoint + size_;
        break;
      case Kind::polynomial:
      case Kind::geometric:
        t = next_formula_value(ctx.prev_endpoint, ctx.horizon);
        break;
      case Kind::explicit_list:
        while (cursor_ < list_.size() && list_[cursor_] <= ctx.prev_endpoint) ++cursor_;
        t = cursor_ < list_.size() ? list_[cursor_++] : ctx.horizon;
        break;
      case Kind::adversarial: {
        t = hook_(ctx);
        if (t <= ctx.prev_endpoint)
          throw std::invalid_argument("schedule hook returned a non-increasing endpoint");
        break;
      }
      case Kind::ipase:
        t = ctx.prev_endpoint + ipase_length(ctx);
        break;
    }
    return std::min(t, ctx.horizon);
  }

  // Schedules carry a formula cursor; reset before reuse on a fresh run.
  void reset() { cursor_ = 0; }

 private:
  explicit BatchSchedule(Kind kind) : kind_(kind) {}

  // Smallest value of the formula image that exceeds prev (duplicates from
  // the ceiling collapse away on their own).
  std::int64_t next_formula_value(std::int64_t prev, std::int64_t horizon) {
    for (;;) {
      ++cursor_;
      const double raw = kind_ == Kind::polynomial
                             ? std::pow(static_cast<double>(cursor_), exponent_)
                             : std::pow(ratio_, static_cast<double>(cursor_));
      if (raw >= static_cast<double>(horizon)) return horizon;
      const auto value = static_cast<std::int64_t>(std::ceil(raw));
      if (value > prev) return value;
    }
  }

  std::int64_t ipase_length(const ScheduleContext& ctx) const {
    if (ctx.batch == 1) return ipase_first_batch(ctx.num_arms);
    if (ctx.probs == nullptr || ctx.log_probs == nullptr)
      throw std::logic_error("adaptive schedule needs boundary probabilities");
    const std::int64_t remaining = ctx.horizon - ctx.prev_endpoint;
    return ipase_batch_length(second_largest(*ctx.probs),
                              second_largest(*ctx.log_probs), remaining);
  }

  Kind kind_;
  std::int64_t size_ = 1;
  double exponent_ = 1.0;
  double ratio_ = 2.0;
  std::vector<std::int64_t> list_;
  Hook hook_;
  std::size_t cursor_ = 0;
};

/* Sample-path check of the endpoint growth condition behind the sequential
 * regret guarantee: exponents log(T_{j+1} - T_j) / log(T_j) should stay
 * bounded away from 1.  A heuristic verdict over the final half of the
 * observed batches, not a proof. */
struct GrowthDiagnostic {
  enum class Verdict { subexponential, inconclusive, violating };
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> exponents;

  static const char* name(Verdict v) {
    switch (v) {
      case Verdict::subexponential: return "subexponential";
      case Verdict::violating: return "violating";
      default: return "inconclusive";
    }
  }
};

inline GrowthDiagnostic growth_diagnostic(std::span<const std::int64_t> endpoints) {
  GrowthDiagnostic d;
  for (std::size_t j = 0; j + 1 < endpoints.size(); ++j) {
    if (endpoints[j] < 2) continue;  // log base must exceed 1
    const double diff = static_cast<double>(endpoints[j + 1] - endpoints[j]);
    d.exponents.push_back(std::log(diff) / std::log(static_cast<double>(endpoints[j])));
  }
  const std::size_t n = d.exponents.size();
  if (n < 2) return d;  // inconclusive
  const std::size_t from = n / 2;
  double tail_max = -std::numeric_limits<double>::infinity();
  std::size_t near_one = 0;
  for (std::size_t k = from; k < n; ++k) {
    tail_max = std::max(tail_max, d.exponents[k]);
    if (d.exponents[k] >= 1.0 - 1e-3) ++near_one;
  }
  const std::size_t window = n - from;
  if (tail_max < 1.0 - 1e-3)
    d.verdict = GrowthDiagnostic::Verdict::subexponential;
  else if (2 * near_one >= window)
    d.verdict = GrowthDiagnostic::Verdict::violating;
  return d;
}

}  // namespace batchts
