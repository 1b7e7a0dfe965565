#pragma once

#include <cstdint>
#include <vector>

#include "batchts/argmax_prob.hpp"
#include "batchts/batching.hpp"
#include "batchts/env.hpp"
#include "batchts/metrics.hpp"
#include "batchts/rng.hpp"
#include "batchts/sampler.hpp"

namespace batchts {

struct SimOptions {
  // Probability route used by adaptive schedules for their batch-length
  // decision.  The ledger's effort accounting always uses the exact route
  // (closed form for two arms, quadrature otherwise) regardless.
  ProbMethod policy_method{};
  double metrics_quad_tol = 1e-10;
  std::vector<std::int64_t> grid;  // checkpoint grid, strictly increasing
  std::size_t boundary_cap = 4096;
  std::size_t endpoint_cap = 100000;
};

struct ReplicateResult {
  std::uint32_t replicate = 0;
  std::int64_t horizon = 0;
  double random_regret = 0.0;
  double pseudo_regret = 0.0;
  std::int64_t batches = 0;
  std::vector<std::int64_t> pulls;
  std::vector<double> effort;
  std::vector<double> per_arm_regret;
  std::vector<CheckpointRow> rows;
  std::vector<BoundaryRecord> boundaries;
  std::vector<BoundaryRecord> final_boundaries;
  bool boundaries_truncated = false;
  std::vector<std::int64_t> endpoints;
  bool endpoints_truncated = false;
  // For adaptive schedules: the runner-up probability the policy actually
  // used when sizing batch j, for j >= 2 (entry k sizes batch k+2), linear
  // and natural-log forms.  Replaying ipase_batch_length over these plus the
  // remaining-horizon values reproduces the realized endpoints exactly.
  std::vector<double> policy_p2;
  std::vector<double> policy_log_p2;
};

namespace detail {

// Does the policy route coincide with the exact route the ledger uses?
inline bool policy_matches_exact(const ProbMethod& m, std::size_t arms, double metrics_tol) {
  switch (m.kind) {
    case ProbMethod::Kind::automatic: return m.quad_tol == metrics_tol || arms == 2;
    case ProbMethod::Kind::closed_form: return arms == 2;
    case ProbMethod::Kind::quadrature: return arms != 2 && m.quad_tol == metrics_tol;
    default: return false;
  }
}

}  // namespace detail

/* One full replicate of batched Thompson sampling.
 *
 * All randomness comes from three streams keyed by (master_seed, replicate,
 * purpose), so a replicate's trajectory is a pure function of those values
 * no matter how replicates are scheduled across threads. */
inline ReplicateResult run_replicate(const Environment& env, BatchSchedule schedule,
                                     std::int64_t horizon, std::uint64_t master_seed,
                                     std::uint32_t replicate, const SimOptions& opt) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  schedule.reset();
  RngStream reward_rng(master_seed, replicate, RngStream::Purpose::rewards);
  RngStream thompson_rng(master_seed, replicate, RngStream::Purpose::thompson);
  RngStream mc_rng(master_seed, replicate, RngStream::Purpose::monte_carlo);

  AgentState agent(env.size());
  RegretLedger ledger(env, opt.grid, opt.boundary_cap);

  ProbMethod exact{};  // automatic = closed form (2 arms) or quadrature
  exact.quad_tol = opt.metrics_quad_tol;
  const bool policy_is_exact =
      detail::policy_matches_exact(opt.policy_method, env.size(), opt.metrics_quad_tol);

  ProbVector batch_probs = arm_max_probabilities(agent.posterior_profile(), exact);
  ProbVector policy_probs;
  if (schedule.wants_probs() && !policy_is_exact)
    policy_probs = arm_max_probabilities(agent.posterior_profile(), opt.policy_method, &mc_rng);

  ReplicateResult out;
  out.replicate = replicate;
  out.horizon = horizon;
  std::vector<double> rewards(env.size());

  std::int64_t j = 0;
  while (agent.time() < horizon) {
    ++j;
    const ProbVector& decision = policy_is_exact ? batch_probs : policy_probs;
    ScheduleContext ctx;
    ctx.batch = j;
    ctx.prev_endpoint = agent.time();
    ctx.horizon = horizon;
    ctx.num_arms = env.size();
    ctx.probs = schedule.wants_probs() ? &decision.probs : &batch_probs.probs;
    ctx.log_probs = schedule.wants_probs() ? &decision.log_probs : &batch_probs.log_probs;
    ctx.snapshot = &agent.snapshot();
    ctx.endpoints = &agent.endpoints();
    if (schedule.kind() == BatchSchedule::Kind::ipase && j >= 2 &&
        out.policy_log_p2.size() < opt.endpoint_cap) {
      out.policy_p2.push_back(second_largest(decision.probs));
      out.policy_log_p2.push_back(second_largest(decision.log_probs));
    }

    const std::int64_t t_j = schedule.next_endpoint(ctx);
    agent.begin_batch(t_j);
    while (agent.time() < t_j) {
      const std::size_t a = agent.sample_action(thompson_rng);
      env.draw_all(reward_rng, rewards);
      agent.record_observation(a, rewards[a]);
      ledger.step_update(a, rewards, batch_probs.probs);
      if (agent.time() == t_j) {
        agent.close_batch();
        ledger.on_batch_close();
        const GaussianProfile profile = agent.posterior_profile();
        batch_probs = arm_max_probabilities(profile, exact, nullptr);
        ledger.record_boundary(batch_probs.probs, batch_probs.log_probs,
                               profile.means, profile.variances);
        if (schedule.wants_probs() && !policy_is_exact)
          policy_probs = arm_max_probabilities(profile, opt.policy_method, &mc_rng);
      }
      ledger.checkpoint_tick();
    }
  }

  out.random_regret = ledger.random_regret();
  out.pseudo_regret = ledger.pseudo_regret();
  out.batches = ledger.batches();
  out.pulls = ledger.pulls();
  out.effort = ledger.effort();
  out.per_arm_regret = ledger.per_arm_regret();
  out.rows = ledger.rows();
  out.boundaries = ledger.boundaries();
  out.final_boundaries = ledger.final_boundaries();
  out.boundaries_truncated = ledger.boundaries_truncated();
  const auto& eps = agent.endpoints();
  if (eps.size() > opt.endpoint_cap) {
    out.endpoints.assign(eps.begin(), eps.begin() + static_cast<std::ptrdiff_t>(opt.endpoint_cap));
    out.endpoints_truncated = true;
  } else {
    out.endpoints = eps;
  }
  return out;
}

}  // namespace batchts
