#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "batchts/harness.hpp"

namespace batchts {

namespace detail {

inline std::string fixed3(double x) {
  if (std::isnan(x)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

inline std::string stat_pm(const SummaryStat& s) {
  if (std::isnan(s.se)) return fixed3(s.mean);
  return fixed3(s.mean) + " +/- " + fixed3(s.se);
}

struct Welford {
  double sum = 0.0, sumsq = 0.0;
  std::int64_t n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
  double se() const {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean();
    const double var = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  }
};

}  // namespace detail

/* Side-by-side regret trajectories for runs of the same environment and
 * horizon; ratios are against the first run.  Optionally also written as a
 * machine-readable CSV. */
inline void compare_runs(const std::vector<RunOutput>& runs, std::ostream& os,
                         const std::string& csv_path = std::string()) {
  if (runs.size() < 2) throw config_error("compare needs at least two runs");
  const auto& base_meta = runs.front().metadata;
  for (const RunOutput& run : runs) {
    const auto& m = run.metadata;
    if (m.at("config").at("arms") != base_meta.at("config").at("arms"))
      throw config_error("cannot compare: " + run.dir + " was run on different arms");
    if (m.at("config").at("horizon") != base_meta.at("config").at("horizon"))
      throw config_error("cannot compare: " + run.dir + " has a different horizon");
    if (m.at("grid") != base_meta.at("grid"))
      throw config_error("cannot compare: " + run.dir + " has a different checkpoint grid");
    if (run.rows.size() != runs.front().rows.size())
      throw io_error("aggregate row count mismatch in " + run.dir);
  }

  os << "runs:\n";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    os << "  [" << k << "] " << runs[k].label << "  (" << runs[k].dir << ", "
       << runs[k].replicates << " replicates, schedule "
       << runs[k].metadata.at("config").at("schedule").at("kind").get<std::string>() << ")\n";
  }
  os << "\nmean random regret at checkpoints (ratio vs [0]):\n";
  os << "      t";
  for (std::size_t k = 0; k < runs.size(); ++k) os << "  [" << k << "]";
  os << "\n";
  for (std::size_t row = 0; row < runs.front().rows.size(); ++row) {
    char tbuf[24];
    std::snprintf(tbuf, sizeof tbuf, "%7lld",
                  static_cast<long long>(runs.front().rows[row].t));
    os << tbuf;
    const double base = runs.front().rows[row].random_regret.mean;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const double mean = runs[k].rows[row].random_regret.mean;
      os << "  " << detail::fixed3(mean);
      if (k > 0) os << " (x" << detail::fixed3(base != 0.0 ? mean / base : std::numeric_limits<double>::quiet_NaN()) << ")";
    }
    os << "\n";
  }
  os << "\nfinal batches:\n";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& last = runs[k].rows.back();
    os << "  [" << k << "] " << detail::stat_pm(last.batches) << "\n";
  }

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw io_error("cannot write comparison CSV: " + csv_path);
    csv << "checkpoint_t";
    for (std::size_t k = 0; k < runs.size(); ++k)
      csv << ",mean_random_regret_" << k << ",mean_batches_" << k;
    for (std::size_t k = 1; k < runs.size(); ++k) csv << ",regret_ratio_" << k << "_vs_0";
    csv << "\n";
    for (std::size_t row = 0; row < runs.front().rows.size(); ++row) {
      csv << runs.front().rows[row].t;
      for (const RunOutput& run : runs)
        csv << ',' << detail::format_double(run.rows[row].random_regret.mean) << ','
            << detail::format_double(run.rows[row].batches.mean);
      const double base = runs.front().rows[row].random_regret.mean;
      for (std::size_t k = 1; k < runs.size(); ++k)
        csv << ',' << detail::format_double(runs[k].rows[row].random_regret.mean / base);
      csv << "\n";
    }
  }
}

/* Per-run report against the sequential limits: regret and batch growth per
 * log t, the boundary log-probability ratio, and measurement effort vs
 * realized pulls.  Averages over replicates; natural logs throughout. */
inline void diagnose_run(const RunOutput& run, const std::vector<ReplicateResult>& reps,
                         std::ostream& os) {
  const ExperimentConfig config = config_from_json(run.metadata.at("config"));
  const Environment env(config.arms);
  const double log_t = std::log(static_cast<double>(config.horizon));

  double theorem1 = 0.0, theorem2 = 0.0;
  for (std::size_t i = 1; i < env.size(); ++i) {
    theorem1 += 2.0 / env.gap(i);
    theorem2 += 2.0 / (env.gap(i) * env.gap(i));
  }

  detail::Welford random_slope, pseudo_slope, batch_slope;
  for (const ReplicateResult& r : reps) {
    random_slope.add(r.random_regret / log_t);
    pseudo_slope.add(r.pseudo_regret / log_t);
    batch_slope.add(static_cast<double>(r.batches) / log_t);
  }

  os << "run " << run.label << ": " << reps.size() << " replicates, horizon "
     << config.horizon << ", schedule " << config.schedule.name() << "\n";
  os << "  regret growth      R(T)/ln T: " << detail::fixed3(random_slope.mean()) << " +/- "
     << detail::fixed3(random_slope.se()) << "   (sequential limit " << detail::fixed3(theorem1)
     << ")\n";
  os << "  pseudo-regret      D(T)/ln T: " << detail::fixed3(pseudo_slope.mean()) << " +/- "
     << detail::fixed3(pseudo_slope.se()) << "   (sequential limit " << detail::fixed3(theorem1)
     << ")\n";
  os << "  batch growth       B(T)/ln T: " << detail::fixed3(batch_slope.mean()) << " +/- "
     << detail::fixed3(batch_slope.se()) << "   (adaptive-rule bound " << detail::fixed3(theorem2)
     << ")\n";

  // Boundary ratio -log P(A=i)/S_i over the last up-to-10 boundaries.
  for (std::size_t arm = 1; arm < env.size(); ++arm) {
    detail::Welford ratio;
    for (const ReplicateResult& r : reps) {
      const auto& fb = r.final_boundaries;
      const std::size_t from = fb.size() > 10 ? fb.size() - 10 : 0;
      detail::Welford per_rep;
      for (std::size_t k = from; k < fb.size(); ++k) {
        const double lp = fb[k].log_probs[arm];
        const double s = fb[k].effort[arm];
        if (std::isfinite(lp) && s > 0.0) per_rep.add(-lp / s);
      }
      if (per_rep.n > 0) ratio.add(per_rep.mean());
    }
    const double target = env.gap(arm) * env.gap(arm) / 2.0;
    os << "  boundary ratio     -ln P(A=" << arm + 1 << ")/S_" << arm + 1 << ": "
       << detail::fixed3(ratio.mean()) << " +/- " << detail::fixed3(ratio.se()) << "   (limit "
       << detail::fixed3(target) << ", gap " << detail::fixed3(env.gap(arm)) << ")\n";
  }

  detail::Welford opt_prob;
  std::int64_t concentrated = 0;
  for (const ReplicateResult& r : reps) {
    if (r.final_boundaries.empty()) continue;
    const double p = r.final_boundaries.back().opt_prob;
    opt_prob.add(p);
    if (p > 0.999) ++concentrated;
  }
  os << "  P(A = best) final: " << detail::fixed3(opt_prob.mean()) << ", > 0.999 in "
     << concentrated << "/" << reps.size() << " replicates\n";

  for (std::size_t arm = 1; arm < env.size(); ++arm) {
    detail::Welford ratio;
    std::int64_t close = 0;
    for (const ReplicateResult& r : reps) {
      if (!(r.effort[arm] > 0.0)) continue;
      const double x = static_cast<double>(r.pulls[arm]) / r.effort[arm];
      ratio.add(x);
      if (std::abs(x - 1.0) <= 0.15) ++close;
    }
    os << "  pulls/effort       N_" << arm + 1 << "/S_" << arm + 1 << ": "
       << detail::fixed3(ratio.mean()) << " +/- " << detail::fixed3(ratio.se())
       << "   (limit 1.000; within 0.15 in " << close << "/" << reps.size() << ")\n";
  }
}

/* Endpoint growth check for a config.  Fixed schedules are expanded
 * directly; adaptive ones are simulated for one replicate and judged on the
 * realized path. */
inline GrowthDiagnostic validate_schedule(const ExperimentConfig& config, std::ostream& os) {
  std::vector<std::int64_t> endpoints;
  if (config.schedule.adaptive()) {
    SimOptions opt;
    opt.policy_method = config.prob_method;
    opt.grid = {config.horizon};
    opt.endpoint_cap = 1000000;
    const Environment env(config.arms);
    const ReplicateResult r = run_replicate(env, config.schedule.to_schedule(), config.horizon,
                                            config.master_seed, 0, opt);
    endpoints = r.endpoints;
    os << "adaptive schedule: judging the realized endpoint path of replicate 0\n";
  } else {
    BatchSchedule schedule = config.schedule.to_schedule();
    ScheduleContext ctx;
    ctx.horizon = config.horizon;
    ctx.num_arms = config.arms.size();
    while (ctx.prev_endpoint < config.horizon) {
      ++ctx.batch;
      ctx.prev_endpoint = schedule.next_endpoint(ctx);
      endpoints.push_back(ctx.prev_endpoint);
    }
  }
  const GrowthDiagnostic d = growth_diagnostic(endpoints);
  os << "schedule " << config.schedule.name() << ": " << endpoints.size()
     << " batches to horizon " << config.horizon << "\n";
  os << "growth verdict: " << GrowthDiagnostic::name(d.verdict) << "\n";
  if (!d.exponents.empty()) {
    os << "trailing growth exponents log(T_{j+1}-T_j)/log(T_j):";
    const std::size_t from = d.exponents.size() > 8 ? d.exponents.size() - 8 : 0;
    for (std::size_t k = from; k < d.exponents.size(); ++k)
      os << ' ' << detail::fixed3(d.exponents[k]);
    os << "\n";
  }
  return d;
}

}  // namespace batchts
