#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "batchts/argmax_prob.hpp"
#include "batchts/rng.hpp"

namespace batchts {

/* Gaussian pseudo-posterior for one arm, N(mu_hat, sigma2_hat) with
 *   mu_hat     = reward_sum / (1 + pull_count)
 *   sigma2_hat = 1 / (1 + pull_count).
 * Both are derived from (reward_sum, pull_count) on read, so they are always
 * the correctly rounded value for the current counts and never drift through
 * incremental updates.  A fresh arm is N(0, 1). */
struct ArmPosterior {
  double reward_sum = 0.0;
  std::int64_t pull_count = 0;

  double mu_hat() const { return reward_sum / (1.0 + static_cast<double>(pull_count)); }
  double sigma2_hat() const { return 1.0 / (1.0 + static_cast<double>(pull_count)); }
};

/* Thompson sampling agent that only looks at data from completed batches.
 *
 * Inside an open batch every action is sampled from the posteriors frozen at
 * the last boundary; pull counts tick immediately, reward statistics fold in
 * only when the batch closes.  Running with unit batches reproduces fully
 * sequential Thompson sampling. */
class AgentState {
 public:
  explicit AgentState(std::size_t num_arms) : live_(num_arms), frozen_(num_arms) {
    if (num_arms < 2) throw std::invalid_argument("need at least 2 arms");
  }

  // Warm start from existing statistics; time resumes at the total pull count.
  explicit AgentState(std::vector<ArmPosterior> stats)
      : live_(std::move(stats)), frozen_(live_) {
    if (live_.size() < 2) throw std::invalid_argument("need at least 2 arms");
    for (const ArmPosterior& a : live_) {
      if (a.pull_count < 0) throw std::invalid_argument("negative pull count");
      time_ += a.pull_count;
    }
  }

  std::size_t num_arms() const { return live_.size(); }
  std::int64_t time() const { return time_; }
  bool batch_open() const { return open_; }
  std::int64_t open_endpoint() const { return open_endpoint_; }
  std::int64_t closed_batches() const { return static_cast<std::int64_t>(endpoints_.size()); }
  const std::vector<std::int64_t>& endpoints() const { return endpoints_; }
  const std::vector<ArmPosterior>& posteriors() const { return live_; }
  const std::vector<ArmPosterior>& snapshot() const { return frozen_; }

  GaussianProfile snapshot_profile() const { return profile_of(frozen_); }
  GaussianProfile posterior_profile() const { return profile_of(live_); }

  void begin_batch(std::int64_t endpoint) {
    if (open_) throw std::logic_error("previous batch still open");
    if (endpoint <= time_) throw std::logic_error("batch endpoint must exceed current time");
    open_ = true;
    open_endpoint_ = endpoint;
  }

  // One Thompson draw from the frozen posteriors; ties go to the lowest index.
  std::size_t sample_action(RngStream& rng) {
    if (!open_ || time_ >= open_endpoint_)
      throw std::logic_error("sample_action outside an open batch");
    if (awaiting_reward_) throw std::logic_error("previous action has no observation yet");
    std::size_t best = 0;
    double best_theta = 0.0;
    for (std::size_t i = 0; i < frozen_.size(); ++i) {
      const double theta =
          frozen_[i].mu_hat() + std::sqrt(frozen_[i].sigma2_hat()) * rng.normal();
      if (i == 0 || theta > best_theta) {
        best_theta = theta;
        best = i;
      }
    }
    ++time_;
    awaiting_reward_ = true;
    last_action_ = best;
    return best;
  }

  // Books the step's observation. The arm is taken as given rather than
  // checked against the last Thompson draw, so externally chosen actions
  // (replays, scripted traces) fold through the same path.
  void record_observation(std::size_t arm, double reward) {
    if (!awaiting_reward_) throw std::logic_error("no action pending an observation");
    if (arm >= live_.size()) throw std::invalid_argument("arm index out of range");
    if (!std::isfinite(reward)) throw std::invalid_argument("reward must be finite");
    ++live_[arm].pull_count;
    pending_.emplace_back(arm, reward);
    awaiting_reward_ = false;
  }

  // Fold the batch's observations into the statistics and refreeze.
  void close_batch() {
    if (!open_) throw std::logic_error("no batch open");
    if (time_ != open_endpoint_) throw std::logic_error("batch endpoint not reached");
    if (awaiting_reward_) throw std::logic_error("pending action has no observation");
    for (const auto& [arm, reward] : pending_) live_[arm].reward_sum += reward;
    pending_.clear();
    frozen_ = live_;
    endpoints_.push_back(open_endpoint_);
    open_ = false;
  }

 private:
  static GaussianProfile profile_of(const std::vector<ArmPosterior>& ps) {
    GaussianProfile p;
    for (const ArmPosterior& a : ps) {
      p.means.push_back(a.mu_hat());
      p.variances.push_back(a.sigma2_hat());
    }
    return p;
  }

  std::vector<ArmPosterior> live_;
  std::vector<ArmPosterior> frozen_;
  std::vector<std::pair<std::size_t, double>> pending_;
  std::vector<std::int64_t> endpoints_;
  std::int64_t time_ = 0;
  std::int64_t open_endpoint_ = 0;
  std::size_t last_action_ = 0;
  bool open_ = false;
  bool awaiting_reward_ = false;
};

}  // namespace batchts
