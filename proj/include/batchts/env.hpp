#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "batchts/rng.hpp"

namespace batchts {

enum class ArmKind { gaussian, bernoulli };

class ArmModel {
 public:
  static ArmModel gaussian(double mean, double variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0)
      throw std::invalid_argument("gaussian arm needs finite mean and variance >= 0");
    return ArmModel(ArmKind::gaussian, mean, variance);
  }

  static ArmModel bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("bernoulli arm needs p in [0, 1]");
    return ArmModel(ArmKind::bernoulli, p, p * (1.0 - p));
  }

  ArmKind kind() const { return kind_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }

  // One reward draw.  Always consumes exactly one value from the stream so
  // the draw sequence does not depend on arm parameters.
  double draw(RngStream& rng) const {
    if (kind_ == ArmKind::bernoulli) return rng.bernoulli(mean_) ? 1.0 : 0.0;
    return mean_ + std::sqrt(variance_) * rng.normal();
  }

 private:
  ArmModel(ArmKind kind, double mean, double variance)
      : kind_(kind), mean_(mean), variance_(variance) {}

  ArmKind kind_;
  double mean_;
  double variance_;
};

/* A fixed set of arms, internally reordered so the unique best arm sits at
 * index 0.  The original positions are kept for reporting. */
class Environment {
 public:
  explicit Environment(std::vector<ArmModel> arms) {
    if (arms.size() < 2) throw std::invalid_argument("need at least 2 arms");
    std::vector<std::size_t> order(arms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return arms[a].mean() > arms[b].mean();
    });
    if (arms[order[0]].mean() == arms[order[1]].mean())
      throw std::invalid_argument("the best arm must be unique");
    for (std::size_t i : order) arms_.push_back(arms[i]);
    input_index_ = std::move(order);
    for (const ArmModel& a : arms_) gaps_.push_back(arms_[0].mean() - a.mean());
  }

  std::size_t size() const { return arms_.size(); }
  const ArmModel& arm(std::size_t i) const { return arms_.at(i); }
  // Suboptimality gap of internal arm i; gap(0) == 0.
  double gap(std::size_t i) const { return gaps_.at(i); }
  const std::vector<double>& gaps() const { return gaps_; }
  // Position of internal arm i in the list the environment was built from.
  std::size_t input_index(std::size_t i) const { return input_index_.at(i); }

  // Draw one reward per arm for the current step, in internal arm order.
  // The chosen arm's entry is the realized reward; the rest are the coupled
  // counterfactual draws used by the random-regret accounting.
  void draw_all(RngStream& rng, std::span<double> out) const {
    if (out.size() != arms_.size())
      throw std::invalid_argument("draw_all output size mismatch");
    for (std::size_t i = 0; i < arms_.size(); ++i) out[i] = arms_[i].draw(rng);
  }

 private:
  std::vector<ArmModel> arms_;
  std::vector<double> gaps_;
  std::vector<std::size_t> input_index_;
};

}  // namespace batchts
