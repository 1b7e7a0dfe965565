#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "batchts/env.hpp"

namespace batchts {

struct CheckpointRow {
  std::int64_t t = 0;
  double random_regret = 0.0;
  double pseudo_regret = 0.0;
  std::int64_t batches = 0;
};

/* Snapshot taken just after a batch closes at T_j.  log_probs / opt_prob
 * describe the next batch's frozen selection distribution P(A = i | data
 * through T_j); effort and pulls are S_i(T_j) and N_i(T_j); mu_hat and
 * sigma2_hat are the posterior parameters behind that distribution, logged
 * so any boundary decision can be recomputed from the record alone. */
struct BoundaryRecord {
  std::int64_t batch = 0;
  std::int64_t t = 0;
  double opt_prob = 0.0;
  double random_regret = 0.0;
  double pseudo_regret = 0.0;
  std::vector<double> log_probs;
  std::vector<double> effort;
  std::vector<std::int64_t> pulls;
  std::vector<double> mu_hat;
  std::vector<double> sigma2_hat;
};

/* Running regret accounting for one replicate.
 *
 * random_regret is the realized coupled-draw regret sum (Y_best - Y_chosen
 * per step, drawn jointly), kept per suboptimal arm so the total is the sum
 * of its parts by construction.  pseudo_regret is sum_i gap_i * N_i(t).
 * effort accumulates the frozen per-batch selection probabilities, so
 * S_i(T_j) = sum_j (T_j - T_{j-1}) P(A = i | data through T_{j-1}) exactly.
 *
 * All logs downstream of this ledger are natural logs. */
class RegretLedger {
 public:
  static constexpr std::size_t ring_size = 64;

  RegretLedger(const Environment& env, std::vector<std::int64_t> grid,
               std::size_t boundary_cap = 4096)
      : gaps_(env.gaps()),
        per_arm_regret_(env.size(), 0.0),
        pulls_(env.size(), 0),
        effort_(env.size(), 0.0),
        grid_(std::move(grid)),
        boundary_cap_(boundary_cap) {
    std::int64_t prev = 0;
    for (std::int64_t t : grid_) {
      if (t <= prev) throw std::invalid_argument("checkpoint grid must be strictly increasing, >= 1");
      prev = t;
    }
  }

  std::int64_t time() const { return time_; }
  std::int64_t batches() const { return batches_; }
  const std::vector<std::int64_t>& pulls() const { return pulls_; }
  const std::vector<double>& effort() const { return effort_; }
  const std::vector<double>& per_arm_regret() const { return per_arm_regret_; }
  const std::vector<CheckpointRow>& rows() const { return rows_; }
  const std::vector<BoundaryRecord>& boundaries() const { return boundaries_; }
  bool boundaries_truncated() const { return boundaries_truncated_; }

  // The final <= 64 boundary records in order, kept even past the storage cap.
  std::vector<BoundaryRecord> final_boundaries() const {
    if (ring_.size() < ring_size) return ring_;
    std::vector<BoundaryRecord> out;
    out.reserve(ring_size);
    for (std::size_t k = 0; k < ring_size; ++k)
      out.push_back(ring_[(ring_next_ + k) % ring_size]);
    return out;
  }

  double random_regret() const {
    double r = 0.0;
    for (std::size_t i = 1; i < per_arm_regret_.size(); ++i) r += per_arm_regret_[i];
    return r;
  }

  double pseudo_regret() const {
    double r = 0.0;
    for (std::size_t i = 1; i < gaps_.size(); ++i)
      r += gaps_[i] * static_cast<double>(pulls_[i]);
    return r;
  }

  // rewards: the step's coupled draw, one entry per arm; probs: the open
  // batch's frozen selection probabilities.
  void step_update(std::size_t arm, std::span<const double> rewards,
                   std::span<const double> probs) {
    if (rewards.size() != pulls_.size() || probs.size() != pulls_.size())
      throw std::invalid_argument("reward/probability vector size mismatch");
    ++time_;
    ++pulls_[arm];
    if (arm != 0) per_arm_regret_[arm] += rewards[0] - rewards[arm];
    for (std::size_t i = 0; i < effort_.size(); ++i) effort_[i] += probs[i];
  }

  void on_batch_close() { ++batches_; }

  // Call right after on_batch_close with the next batch's frozen
  // probabilities (exact route, natural-log values alongside) and the
  // posterior parameters they were computed from.
  void record_boundary(std::span<const double> probs, std::span<const double> log_probs,
                       std::span<const double> mu_hat, std::span<const double> sigma2_hat) {
    BoundaryRecord& rec = ring_slot();
    rec.batch = batches_;
    rec.t = time_;
    rec.opt_prob = probs[0];
    rec.random_regret = random_regret();
    rec.pseudo_regret = pseudo_regret();
    rec.log_probs.assign(log_probs.begin(), log_probs.end());
    rec.effort.assign(effort_.begin(), effort_.end());
    rec.pulls.assign(pulls_.begin(), pulls_.end());
    rec.mu_hat.assign(mu_hat.begin(), mu_hat.end());
    rec.sigma2_hat.assign(sigma2_hat.begin(), sigma2_hat.end());
    if (boundaries_.size() < boundary_cap_)
      boundaries_.push_back(rec);
    else
      boundaries_truncated_ = true;
  }

  // Call once per step, after any batch close at that step has been booked,
  // so rows at a boundary count the batch that just closed.
  void checkpoint_tick() {
    if (grid_pos_ < grid_.size() && grid_[grid_pos_] == time_) {
      rows_.push_back({time_, random_regret(), pseudo_regret(), batches_});
      ++grid_pos_;
    }
  }

 private:
  // Per-step schedules close a batch every step, so the ring reuses slots
  // (and their vector capacity) instead of allocating per record.
  BoundaryRecord& ring_slot() {
    if (ring_.size() < ring_size) {
      ring_.emplace_back();
      return ring_.back();
    }
    BoundaryRecord& rec = ring_[ring_next_];
    ring_next_ = (ring_next_ + 1) % ring_size;
    return rec;
  }

  std::vector<double> gaps_;
  std::vector<double> per_arm_regret_;
  std::vector<std::int64_t> pulls_;
  std::vector<double> effort_;
  std::vector<std::int64_t> grid_;
  std::size_t grid_pos_ = 0;
  std::size_t boundary_cap_;
  std::vector<CheckpointRow> rows_;
  std::vector<BoundaryRecord> boundaries_;
  std::vector<BoundaryRecord> ring_;
  std::size_t ring_next_ = 0;
  bool boundaries_truncated_ = false;
  std::int64_t time_ = 0;
  std::int64_t batches_ = 0;
};

struct SlopePoint {
  std::int64_t t = 0;
  double value = 0.0;
};

struct BoundaryDiag {
  std::int64_t batch = 0;
  std::int64_t t = 0;
  double opt_prob = 0.0;
  // -log P(A = i | data through T_j) / S_i(T_j) per arm; NaN when undefined
  // (the optimal arm, zero effort, or a non-finite log-probability).
  std::vector<double> prop1_ratio;
};

/* Trajectories against the sequential limits: regret and batch counts scaled
 * by log t, and the boundary ratio whose limit is gap^2 / 2.  Values are
 * diagnostics to eyeball or band-test, not estimators with guarantees. */
struct AsymptoticDiagnostics {
  double theorem1_target = 0.0;             // sum_{i>=2} 2 / gap_i
  double theorem2_target = 0.0;             // sum_{i>=2} 2 / gap_i^2
  std::vector<double> prop1_target;         // gap_i^2 / 2, NaN for the best arm
  std::vector<SlopePoint> regret_slope;     // R(t) / log t, grid rows with t >= 10
  std::vector<SlopePoint> pseudo_slope;
  std::vector<SlopePoint> batch_slope;
  std::vector<BoundaryDiag> boundary_diag;        // capped record list
  std::vector<BoundaryDiag> final_boundary_diag;  // last <= 64 boundaries
  std::vector<double> effort_ratio;               // final N_i / S_i, NaN if S_i = 0
  double opt_prob_final = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline BoundaryDiag boundary_diag_of(const BoundaryRecord& rec) {
  BoundaryDiag d{rec.batch, rec.t, rec.opt_prob, {}};
  d.prop1_ratio.assign(rec.log_probs.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < rec.log_probs.size(); ++i) {
    const double lp = rec.log_probs[i];
    const double s = rec.effort[i];
    if (std::isfinite(lp) && s > 0.0) d.prop1_ratio[i] = -lp / s;
  }
  return d;
}

}  // namespace detail

inline AsymptoticDiagnostics compute_diagnostics(const RegretLedger& ledger,
                                                 const Environment& env) {
  if (ledger.time() < 10)
    throw std::invalid_argument("diagnostics need at least 10 steps of history");
  AsymptoticDiagnostics d;
  d.prop1_target.assign(env.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < env.size(); ++i) {
    const double gap = env.gap(i);
    d.theorem1_target += 2.0 / gap;
    d.theorem2_target += 2.0 / (gap * gap);
    d.prop1_target[i] = gap * gap / 2.0;
  }
  for (const CheckpointRow& row : ledger.rows()) {
    if (row.t < 10) continue;
    const double lt = std::log(static_cast<double>(row.t));
    d.regret_slope.push_back({row.t, row.random_regret / lt});
    d.pseudo_slope.push_back({row.t, row.pseudo_regret / lt});
    d.batch_slope.push_back({row.t, static_cast<double>(row.batches) / lt});
  }
  for (const BoundaryRecord& rec : ledger.boundaries())
    d.boundary_diag.push_back(detail::boundary_diag_of(rec));
  const std::vector<BoundaryRecord> tail = ledger.final_boundaries();
  for (const BoundaryRecord& rec : tail)
    d.final_boundary_diag.push_back(detail::boundary_diag_of(rec));
  for (std::size_t i = 0; i < env.size(); ++i) {
    const double s = ledger.effort()[i];
    d.effort_ratio.push_back(s > 0.0 ? static_cast<double>(ledger.pulls()[i]) / s
                                     : std::numeric_limits<double>::quiet_NaN());
  }
  if (!tail.empty()) d.opt_prob_final = tail.back().opt_prob;
  return d;
}

// Default checkpoint grid: ceil(ratio^k), every power of ten, and the two
// ends, capped at the horizon.
inline std::vector<std::int64_t> make_checkpoint_grid(std::int64_t horizon,
                                                      double ratio = 1.2) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(ratio > 1.0)) throw std::invalid_argument("checkpoint ratio must be > 1");
  std::vector<std::int64_t> grid{1, horizon};
  for (double v = 1.0; v < static_cast<double>(horizon); v *= ratio) {
    const auto t = static_cast<std::int64_t>(std::ceil(v));
    if (t < horizon) grid.push_back(t);
  }
  for (std::int64_t p = 10; p < horizon && p > 0; p *= 10) grid.push_back(p);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace batchts
