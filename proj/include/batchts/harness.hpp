#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "batchts/simulate.hpp"

namespace batchts {

inline constexpr const char* version_string = "1.0.0";

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* ---------------------------------------------------------------- config */

struct ScheduleSpec {
  BatchSchedule::Kind kind = BatchSchedule::Kind::per_step;
  std::int64_t size = 1;           // constant
  double p = 2.0;                  // polynomial
  double ratio = 2.0;              // geometric
  std::vector<std::int64_t> endpoints;  // explicit list

  BatchSchedule to_schedule() const {
    switch (kind) {
      case BatchSchedule::Kind::per_step: return BatchSchedule::per_step();
      case BatchSchedule::Kind::constant: return BatchSchedule::constant(size);
      case BatchSchedule::Kind::polynomial: return BatchSchedule::polynomial(p);
      case BatchSchedule::Kind::geometric: return BatchSchedule::geometric(ratio);
      case BatchSchedule::Kind::explicit_list: return BatchSchedule::explicit_list(endpoints);
      case BatchSchedule::Kind::ipase: return BatchSchedule::ipase();
      default: throw config_error("schedule kind not representable in a config");
    }
  }

  bool adaptive() const { return kind == BatchSchedule::Kind::ipase; }

  std::string name() const {
    switch (kind) {
      case BatchSchedule::Kind::per_step: return "perstep";
      case BatchSchedule::Kind::constant: return "constant";
      case BatchSchedule::Kind::polynomial: return "polynomial";
      case BatchSchedule::Kind::geometric: return "geometric";
      case BatchSchedule::Kind::explicit_list: return "explicit";
      case BatchSchedule::Kind::ipase: return "ipase";
      default: return "adversarial";
    }
  }
};

struct ExperimentConfig {
  std::vector<ArmModel> arms;  // input order; the environment reorders internally
  std::int64_t horizon = 0;
  std::int64_t replicates = 1;
  std::uint64_t master_seed = 0;
  ScheduleSpec schedule;
  ProbMethod prob_method{};
  double checkpoint_ratio = 1.2;
  std::size_t boundary_cap = 4096;
  std::size_t endpoint_cap = 100000;
  int workers = 1;
  std::string label;
  std::string output_dir = "out";
};

namespace detail {

using nlohmann::json;

inline json arm_to_json(const ArmModel& a) {
  if (a.kind() == ArmKind::bernoulli) return {{"kind", "bernoulli"}, {"p", a.mean()}};
  return {{"kind", "gaussian"}, {"mean", a.mean()}, {"variance", a.variance()}};
}

inline ArmModel arm_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw config_error("each arm needs an object with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "bernoulli") return ArmModel::bernoulli(j.at("p").get<double>());
    if (kind == "gaussian")
      return ArmModel::gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("bad arm: ") + e.what());
  } catch (const json::exception& e) {
    throw config_error(std::string("bad arm fields: ") + e.what());
  }
  throw config_error("unknown arm kind \"" + kind + "\"");
}

inline json schedule_to_json(const ScheduleSpec& s) {
  json j{{"kind", s.name()}};
  switch (s.kind) {
    case BatchSchedule::Kind::constant: j["size"] = s.size; break;
    case BatchSchedule::Kind::polynomial: j["p"] = s.p; break;
    case BatchSchedule::Kind::geometric: j["ratio"] = s.ratio; break;
    case BatchSchedule::Kind::explicit_list: j["endpoints"] = s.endpoints; break;
    default: break;
  }
  return j;
}

inline ScheduleSpec schedule_from_json(const json& j) {
  ScheduleSpec s;
  std::string kind;
  if (j.is_string())
    kind = j.get<std::string>();
  else if (j.is_object() && j.contains("kind"))
    kind = j.at("kind").get<std::string>();
  else
    throw config_error("schedule must be a kind string or an object with a \"kind\"");
  try {
    if (kind == "perstep") {
      s.kind = BatchSchedule::Kind::per_step;
    } else if (kind == "constant") {
      s.kind = BatchSchedule::Kind::constant;
      s.size = j.at("size").get<std::int64_t>();
    } else if (kind == "polynomial" || kind == "poly") {
      s.kind = BatchSchedule::Kind::polynomial;
      s.p = j.at("p").get<double>();
    } else if (kind == "geometric" || kind == "geom") {
      s.kind = BatchSchedule::Kind::geometric;
      s.ratio = j.at("ratio").get<double>();
    } else if (kind == "explicit") {
      s.kind = BatchSchedule::Kind::explicit_list;
      s.endpoints = j.at("endpoints").get<std::vector<std::int64_t>>();
    } else if (kind == "ipase") {
      s.kind = BatchSchedule::Kind::ipase;
    } else {
      throw config_error("unknown schedule kind \"" + kind + "\"");
    }
    s.to_schedule();  // run the constructor checks now, not at replicate time
  } catch (const json::exception& e) {
    throw config_error(std::string("bad schedule fields: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("bad schedule: ") + e.what());
  }
  return s;
}

inline const char* prob_method_name(ProbMethod::Kind k) {
  switch (k) {
    case ProbMethod::Kind::closed_form: return "closed-form";
    case ProbMethod::Kind::quadrature: return "quadrature";
    case ProbMethod::Kind::monte_carlo: return "monte-carlo";
    default: return "auto";
  }
}

inline json prob_method_to_json(const ProbMethod& m) {
  return {{"kind", prob_method_name(m.kind)}, {"tol", m.quad_tol}, {"samples", m.mc_samples}};
}

inline ProbMethod prob_method_from_json(const json& j) {
  ProbMethod m;
  std::string kind = "auto";
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else if (j.is_object()) {
    kind = j.value("kind", "auto");
    m.quad_tol = j.value("tol", m.quad_tol);
    m.mc_samples = j.value("samples", m.mc_samples);
  } else {
    throw config_error("prob_method must be a kind string or an object");
  }
  if (kind == "auto")
    m.kind = ProbMethod::Kind::automatic;
  else if (kind == "closed-form")
    m.kind = ProbMethod::Kind::closed_form;
  else if (kind == "quadrature")
    m.kind = ProbMethod::Kind::quadrature;
  else if (kind == "monte-carlo" || kind == "mc")
    m.kind = ProbMethod::Kind::monte_carlo;
  else
    throw config_error("unknown prob_method \"" + kind + "\"");
  if (!(m.quad_tol > 0.0)) throw config_error("prob_method tol must be > 0");
  if (m.mc_samples < 1) throw config_error("prob_method samples must be >= 1");
  return m;
}

// 17 significant digits round-trips a double exactly.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline detail::json config_to_json(const ExperimentConfig& c) {
  detail::json arms = detail::json::array();
  for (const ArmModel& a : c.arms) arms.push_back(detail::arm_to_json(a));
  return {{"arms", arms},
          {"horizon", c.horizon},
          {"replicates", c.replicates},
          {"master_seed", c.master_seed},
          {"schedule", detail::schedule_to_json(c.schedule)},
          {"prob_method", detail::prob_method_to_json(c.prob_method)},
          {"checkpoint_ratio", c.checkpoint_ratio},
          {"boundary_cap", c.boundary_cap},
          {"endpoint_cap", c.endpoint_cap},
          {"workers", c.workers},
          {"label", c.label},
          {"output_dir", c.output_dir}};
}

inline ExperimentConfig config_from_json(const detail::json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  ExperimentConfig c;
  try {
    if (!j.contains("arms") || !j.at("arms").is_array() || j.at("arms").size() < 2)
      throw config_error("config needs an \"arms\" array with at least 2 arms");
    for (const auto& a : j.at("arms")) c.arms.push_back(detail::arm_from_json(a));
    if (!j.contains("horizon")) throw config_error("config needs a \"horizon\"");
    c.horizon = j.at("horizon").get<std::int64_t>();
    c.replicates = j.value("replicates", c.replicates);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("schedule")) c.schedule = detail::schedule_from_json(j.at("schedule"));
    if (j.contains("prob_method"))
      c.prob_method = detail::prob_method_from_json(j.at("prob_method"));
    c.checkpoint_ratio = j.value("checkpoint_ratio", c.checkpoint_ratio);
    c.boundary_cap = j.value("boundary_cap", c.boundary_cap);
    c.endpoint_cap = j.value("endpoint_cap", c.endpoint_cap);
    c.workers = j.value("workers", c.workers);
    c.label = j.value("label", c.label);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const detail::json::exception& e) {
    throw config_error(std::string("bad config field: ") + e.what());
  }
  if (c.horizon < 1) throw config_error("horizon must be >= 1");
  if (c.replicates < 1) throw config_error("replicates must be >= 1");
  if (!(c.checkpoint_ratio > 1.0)) throw config_error("checkpoint_ratio must be > 1");
  if (c.workers < 1) throw config_error("workers must be >= 1");
  try {
    Environment probe(c.arms);  // validates arm set (unique best arm, ...)
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("bad arms: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  detail::json j;
  try {
    in >> j;
  } catch (const detail::json::exception& e) {
    throw config_error("config is not valid JSON (" + path + "): " + e.what());
  }
  return config_from_json(j);
}

/* ------------------------------------------------------------ experiment */

struct SummaryStat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();  // NaN with < 2 replicates
};

struct AggregateRow {
  std::int64_t t = 0;
  SummaryStat random_regret, pseudo_regret, batches;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  SummaryStat final_random_regret, final_pseudo_regret, final_batches;
  std::int64_t replicates = 0;
};

namespace detail {

template <typename Get>
SummaryStat summarize(const std::vector<ReplicateResult>& rs, Get get) {
  SummaryStat s;
  const auto n = static_cast<double>(rs.size());
  double sum = 0.0;
  for (const ReplicateResult& r : rs) sum += get(r);
  s.mean = sum / n;
  if (rs.size() >= 2) {
    double ss = 0.0;
    for (const ReplicateResult& r : rs) {
      const double d = get(r) - s.mean;
      ss += d * d;
    }
    s.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

}  // namespace detail

inline AggregateResult aggregate(const std::vector<ReplicateResult>& results) {
  if (results.empty()) throw std::invalid_argument("no replicates to aggregate");
  const std::size_t rows = results.front().rows.size();
  for (const ReplicateResult& r : results)
    if (r.rows.size() != rows)
      throw std::logic_error("replicates disagree on the checkpoint grid");
  AggregateResult agg;
  agg.replicates = static_cast<std::int64_t>(results.size());
  for (std::size_t k = 0; k < rows; ++k) {
    AggregateRow row;
    row.t = results.front().rows[k].t;
    row.random_regret =
        detail::summarize(results, [k](const ReplicateResult& r) { return r.rows[k].random_regret; });
    row.pseudo_regret =
        detail::summarize(results, [k](const ReplicateResult& r) { return r.rows[k].pseudo_regret; });
    row.batches = detail::summarize(
        results, [k](const ReplicateResult& r) { return static_cast<double>(r.rows[k].batches); });
    agg.rows.push_back(row);
  }
  agg.final_random_regret =
      detail::summarize(results, [](const ReplicateResult& r) { return r.random_regret; });
  agg.final_pseudo_regret =
      detail::summarize(results, [](const ReplicateResult& r) { return r.pseudo_regret; });
  agg.final_batches =
      detail::summarize(results, [](const ReplicateResult& r) { return static_cast<double>(r.batches); });
  return agg;
}

struct ExperimentOutput {
  ExperimentConfig config;
  std::vector<std::int64_t> grid;
  std::vector<ReplicateResult> replicates;
  AggregateResult aggregate;
};

/* Run every replicate of a config.  Replicates are farmed out to a worker
 * pool; because each one is a pure function of (master_seed, replicate), the
 * results and all emitted files are byte-identical for any worker count. */
inline ExperimentOutput run_experiment(const ExperimentConfig& config) {
  const Environment env(config.arms);
  ExperimentOutput out;
  out.config = config;
  out.grid = make_checkpoint_grid(config.horizon, config.checkpoint_ratio);

  SimOptions opt;
  opt.policy_method = config.prob_method;
  opt.grid = out.grid;
  opt.boundary_cap = config.boundary_cap;
  opt.endpoint_cap = config.endpoint_cap;
  const BatchSchedule schedule = config.schedule.to_schedule();

  const auto n = static_cast<std::size_t>(config.replicates);
  out.replicates.resize(n);
  const int workers = static_cast<int>(
      std::min<std::int64_t>(config.workers, config.replicates));

  auto work = [&](std::atomic<std::size_t>& next, std::exception_ptr& first_error,
                  std::mutex& error_mutex) {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= n) return;
      try {
        out.replicates[idx] =
            run_replicate(env, schedule, config.horizon, config.master_seed,
                          static_cast<std::uint32_t>(idx), opt);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  if (workers <= 1) {
    work(next, first_error, error_mutex);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] { work(next, first_error, error_mutex); });
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  out.aggregate = aggregate(out.replicates);
  return out;
}

/* ---------------------------------------------------------------- output */

inline const char* aggregate_csv_header =
    "checkpoint_t, mean_random_regret, se_random_regret, mean_pseudo_regret, "
    "se_pseudo_regret, mean_batches, se_batches";

namespace detail {

inline std::string se_field(const SummaryStat& s) {
  return std::isnan(s.se) ? std::string() : format_double(s.se);
}

inline json boundary_to_json(const BoundaryRecord& b) {
  return {{"batch", b.batch},
          {"t", b.t},
          {"opt_prob", b.opt_prob},
          {"random_regret", b.random_regret},
          {"pseudo_regret", b.pseudo_regret},
          {"log_probs", b.log_probs},
          {"effort", b.effort},
          {"pulls", b.pulls},
          {"mu_hat", b.mu_hat},
          {"sigma2_hat", b.sigma2_hat}};
}

inline BoundaryRecord boundary_from_json(const json& j) {
  BoundaryRecord b;
  b.batch = j.at("batch").get<std::int64_t>();
  b.t = j.at("t").get<std::int64_t>();
  b.opt_prob = j.at("opt_prob").get<double>();
  b.random_regret = j.at("random_regret").get<double>();
  b.pseudo_regret = j.at("pseudo_regret").get<double>();
  b.log_probs = j.at("log_probs").get<std::vector<double>>();
  b.effort = j.at("effort").get<std::vector<double>>();
  b.pulls = j.at("pulls").get<std::vector<std::int64_t>>();
  b.mu_hat = j.at("mu_hat").get<std::vector<double>>();
  b.sigma2_hat = j.at("sigma2_hat").get<std::vector<double>>();
  return b;
}

}  // namespace detail

inline detail::json replicate_to_json(const ReplicateResult& r) {
  detail::json rows = detail::json::array();
  for (const CheckpointRow& row : r.rows)
    rows.push_back({row.t, row.random_regret, row.pseudo_regret, row.batches});
  detail::json boundaries = detail::json::array();
  for (const BoundaryRecord& b : r.boundaries) boundaries.push_back(detail::boundary_to_json(b));
  detail::json final_boundaries = detail::json::array();
  for (const BoundaryRecord& b : r.final_boundaries)
    final_boundaries.push_back(detail::boundary_to_json(b));
  return {{"replicate", r.replicate},
          {"horizon", r.horizon},
          {"final",
           {{"random_regret", r.random_regret},
            {"pseudo_regret", r.pseudo_regret},
            {"batches", r.batches},
            {"pulls", r.pulls},
            {"effort", r.effort},
            {"per_arm_regret", r.per_arm_regret}}},
          {"rows", rows},
          {"boundaries", boundaries},
          {"boundaries_truncated", r.boundaries_truncated},
          {"final_boundaries", final_boundaries},
          {"endpoints", r.endpoints},
          {"endpoints_truncated", r.endpoints_truncated},
          {"policy_p2", r.policy_p2},
          {"policy_log_p2", r.policy_log_p2}};
}

inline ReplicateResult replicate_from_json(const detail::json& j) {
  ReplicateResult r;
  try {
    r.replicate = j.at("replicate").get<std::uint32_t>();
    r.horizon = j.at("horizon").get<std::int64_t>();
    const auto& f = j.at("final");
    r.random_regret = f.at("random_regret").get<double>();
    r.pseudo_regret = f.at("pseudo_regret").get<double>();
    r.batches = f.at("batches").get<std::int64_t>();
    r.pulls = f.at("pulls").get<std::vector<std::int64_t>>();
    r.effort = f.at("effort").get<std::vector<double>>();
    r.per_arm_regret = f.at("per_arm_regret").get<std::vector<double>>();
    for (const auto& row : j.at("rows"))
      r.rows.push_back({row.at(0).get<std::int64_t>(), row.at(1).get<double>(),
                        row.at(2).get<double>(), row.at(3).get<std::int64_t>()});
    for (const auto& b : j.at("boundaries")) r.boundaries.push_back(detail::boundary_from_json(b));
    for (const auto& b : j.at("final_boundaries"))
      r.final_boundaries.push_back(detail::boundary_from_json(b));
    r.boundaries_truncated = j.at("boundaries_truncated").get<bool>();
    r.endpoints = j.at("endpoints").get<std::vector<std::int64_t>>();
    r.endpoints_truncated = j.at("endpoints_truncated").get<bool>();
    r.policy_p2 = j.at("policy_p2").get<std::vector<double>>();
    r.policy_log_p2 = j.at("policy_log_p2").get<std::vector<double>>();
  } catch (const detail::json::exception& e) {
    throw io_error(std::string("bad replicate record: ") + e.what());
  }
  return r;
}

/* The experiment's identity: every field that can change the numbers.
 * Worker count and output location change neither, so they stay out of
 * the hash and out of the recorded config; otherwise the same experiment
 * rerun elsewhere would look like a different one. */
inline detail::json experiment_json(const ExperimentConfig& c) {
  detail::json j = config_to_json(c);
  j.erase("workers");
  j.erase("output_dir");
  return j;
}

inline std::string config_hash(const ExperimentConfig& c) {
  return detail::hex64(detail::fnv1a64(experiment_json(c).dump()));
}

inline detail::json metadata_json(const ExperimentOutput& out) {
  const Environment env(out.config.arms);
  std::vector<std::size_t> arm_order;
  for (std::size_t i = 0; i < env.size(); ++i) arm_order.push_back(env.input_index(i));
  const bool policy_exact =
      detail::policy_matches_exact(out.config.prob_method, env.size(), SimOptions{}.metrics_quad_tol);
  return {{"format", {{"aggregate", "aggregate.csv"}, {"replicates", "replicates.jsonl"}}},
          {"version", version_string},
          {"config", experiment_json(out.config)},
          {"config_hash", config_hash(out.config)},
          {"arm_order", arm_order},
          {"grid", out.grid},
          {"log_base", "e"},
          {"metrics_prob_method", env.size() == 2 ? "closed-form" : "quadrature"},
          {"policy_prob_method", detail::prob_method_name(out.config.prob_method.kind)},
          {"policy_matches_metrics", policy_exact},
          {"seed_scheme", "philox4x32-10; key=splitmix64(master_seed), counter=(block, replicate, purpose)"},
          {"se_defined", out.config.replicates >= 2}};
}

inline void write_outputs(const ExperimentOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());

  {
    std::ofstream csv(fs::path(dir) / "aggregate.csv");
    if (!csv) throw io_error("cannot write aggregate.csv in " + dir);
    csv << aggregate_csv_header << "\n";
    for (const AggregateRow& row : out.aggregate.rows) {
      csv << row.t << ',' << detail::format_double(row.random_regret.mean) << ','
          << detail::se_field(row.random_regret) << ','
          << detail::format_double(row.pseudo_regret.mean) << ','
          << detail::se_field(row.pseudo_regret) << ','
          << detail::format_double(row.batches.mean) << ','
          << detail::se_field(row.batches) << "\n";
    }
  }
  {
    std::ofstream jsonl(fs::path(dir) / "replicates.jsonl");
    if (!jsonl) throw io_error("cannot write replicates.jsonl in " + dir);
    for (const ReplicateResult& r : out.replicates) jsonl << replicate_to_json(r).dump() << "\n";
  }
  {
    std::ofstream meta(fs::path(dir) / "metadata.json");
    if (!meta) throw io_error("cannot write metadata.json in " + dir);
    meta << metadata_json(out).dump(2) << "\n";
  }
}

/* ----------------------------------------------------------------- input */

struct RunOutput {
  detail::json metadata;
  std::vector<AggregateRow> rows;
  std::int64_t replicates = 0;
  std::string label;
  std::string dir;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != ' ' && ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

inline double parse_stat_field(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace detail

inline RunOutput load_run(const std::string& dir) {
  namespace fs = std::filesystem;
  RunOutput run;
  run.dir = dir;
  {
    std::ifstream meta(fs::path(dir) / "metadata.json");
    if (!meta) throw io_error("cannot open " + dir + "/metadata.json");
    try {
      meta >> run.metadata;
    } catch (const detail::json::exception& e) {
      throw io_error(dir + "/metadata.json is not valid JSON: " + std::string(e.what()));
    }
  }
  run.label = run.metadata.at("config").value("label", std::string());
  if (run.label.empty()) run.label = fs::path(dir).filename().string();
  run.replicates = run.metadata.at("config").at("replicates").get<std::int64_t>();

  std::ifstream csv(fs::path(dir) / "aggregate.csv");
  if (!csv) throw io_error("cannot open " + dir + "/aggregate.csv");
  std::string line;
  if (!std::getline(csv, line)) throw io_error(dir + "/aggregate.csv is empty");
  if (detail::split_csv_line(line) != detail::split_csv_line(aggregate_csv_header))
    throw io_error(dir + "/aggregate.csv has an unexpected header");
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw io_error(dir + "/aggregate.csv has a malformed row");
    AggregateRow row;
    try {
      row.t = std::stoll(f[0]);
      row.random_regret = {detail::parse_stat_field(f[1]), detail::parse_stat_field(f[2])};
      row.pseudo_regret = {detail::parse_stat_field(f[3]), detail::parse_stat_field(f[4])};
      row.batches = {detail::parse_stat_field(f[5]), detail::parse_stat_field(f[6])};
    } catch (const std::exception&) {
      throw io_error(dir + "/aggregate.csv has a non-numeric field");
    }
    run.rows.push_back(row);
  }
  return run;
}

inline std::vector<ReplicateResult> load_replicates(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "replicates.jsonl");
  if (!in) throw io_error("cannot open " + dir + "/replicates.jsonl");
  std::vector<ReplicateResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    detail::json j;
    try {
      j = detail::json::parse(line);
    } catch (const detail::json::exception& e) {
      throw io_error(dir + "/replicates.jsonl has a bad line: " + std::string(e.what()));
    }
    out.push_back(replicate_from_json(j));
  }
  if (out.empty()) throw io_error(dir + "/replicates.jsonl is empty");
  return out;
}

}  // namespace batchts
