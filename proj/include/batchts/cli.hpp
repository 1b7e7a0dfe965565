#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "batchts/report.hpp"

namespace batchts {

/* Compact override syntax used by the command line.
 *   arms:      "bern:0.9,bern:0.1" or "gauss:1:1,gauss:0:1"
 *   schedule:  "perstep" | "constant:100" | "poly:2" | "geom:1.5"
 *              | "ipase" | "explicit:3,9,27"
 *   method:    "auto" | "closed-form" | "quadrature[:tol]" | "mc:samples"
 */

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(part);
      part.clear();
    } else {
      part += ch;
    }
  }
  parts.push_back(part);
  return parts;
}

inline double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("cannot parse " + what + " from \"" + s + "\"");
  }
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
  const double v = parse_num(s, what);
  const auto i = static_cast<std::int64_t>(v);
  if (static_cast<double>(i) != v) throw config_error(what + " must be an integer, got \"" + s + "\"");
  return i;
}

}  // namespace detail

inline std::vector<ArmModel> parse_arms_string(const std::string& text) {
  std::vector<ArmModel> arms;
  for (const std::string& spec : detail::split(text, ',')) {
    const auto f = detail::split(spec, ':');
    try {
      if ((f[0] == "bern" || f[0] == "bernoulli") && f.size() == 2) {
        arms.push_back(ArmModel::bernoulli(detail::parse_num(f[1], "bernoulli p")));
        continue;
      }
      if ((f[0] == "gauss" || f[0] == "gaussian") && f.size() == 3) {
        arms.push_back(ArmModel::gaussian(detail::parse_num(f[1], "gaussian mean"),
                                          detail::parse_num(f[2], "gaussian variance")));
        continue;
      }
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("bad arm \"") + spec + "\": " + e.what());
    }
    throw config_error("bad arm spec \"" + spec +
                       "\" (want bern:P or gauss:MEAN:VARIANCE)");
  }
  return arms;
}

inline ScheduleSpec parse_schedule_string(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  ScheduleSpec s;
  try {
    if (kind == "perstep" && arg.empty()) {
      s.kind = BatchSchedule::Kind::per_step;
    } else if (kind == "constant") {
      s.kind = BatchSchedule::Kind::constant;
      s.size = detail::parse_int(arg, "constant batch size");
    } else if (kind == "poly" || kind == "polynomial") {
      s.kind = BatchSchedule::Kind::polynomial;
      s.p = detail::parse_num(arg, "polynomial exponent");
    } else if (kind == "geom" || kind == "geometric") {
      s.kind = BatchSchedule::Kind::geometric;
      s.ratio = detail::parse_num(arg, "geometric ratio");
    } else if (kind == "explicit") {
      s.kind = BatchSchedule::Kind::explicit_list;
      for (const std::string& e : detail::split(arg, ','))
        s.endpoints.push_back(detail::parse_int(e, "endpoint"));
    } else if (kind == "ipase" && arg.empty()) {
      s.kind = BatchSchedule::Kind::ipase;
    } else {
      throw config_error("bad schedule spec \"" + text + "\"");
    }
    s.to_schedule();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("bad schedule \"") + text + "\": " + e.what());
  }
  return s;
}

inline ProbMethod parse_prob_method_string(const std::string& text) {
  const auto f = detail::split(text, ':');
  ProbMethod m;
  if (f[0] == "auto" && f.size() == 1) {
    m.kind = ProbMethod::Kind::automatic;
  } else if (f[0] == "closed-form" && f.size() == 1) {
    m.kind = ProbMethod::Kind::closed_form;
  } else if (f[0] == "quadrature" && f.size() <= 2) {
    m.kind = ProbMethod::Kind::quadrature;
    if (f.size() == 2) m.quad_tol = detail::parse_num(f[1], "quadrature tolerance");
    if (!(m.quad_tol > 0.0)) throw config_error("quadrature tolerance must be > 0");
  } else if ((f[0] == "mc" || f[0] == "monte-carlo") && f.size() == 2) {
    m.kind = ProbMethod::Kind::monte_carlo;
    m.mc_samples = detail::parse_int(f[1], "Monte Carlo sample count");
    if (m.mc_samples < 1) throw config_error("Monte Carlo sample count must be >= 1");
  } else {
    throw config_error("bad probability method \"" + text + "\"");
  }
  return m;
}

/* The `batchts` command line.  Returns a categorized exit code: 0 ok,
 * 2 configuration/usage, 3 file I/O, 4 numerical failure, 1 anything else. */
inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"batched Thompson sampling bandit simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run an experiment config and write results");
  std::string config_path;
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  std::optional<std::int64_t> horizon, replicates, workers;
  std::optional<std::uint64_t> seed;
  std::string schedule_str, arms_str, method_str, out_dir, label;
  run_cmd->add_option("--horizon", horizon, "override horizon T");
  run_cmd->add_option("--replicates", replicates, "override replicate count");
  run_cmd->add_option("--seed", seed, "override master seed");
  run_cmd->add_option("--schedule", schedule_str, "override schedule, e.g. poly:2 or ipase");
  run_cmd->add_option("--arms", arms_str, "override arms, e.g. bern:0.9,bern:0.1");
  run_cmd->add_option("--prob-method", method_str, "override the policy probability route");
  run_cmd->add_option("--out", out_dir, "override output directory");
  run_cmd->add_option("--workers", workers, "override worker thread count");
  run_cmd->add_option("--label", label, "override the run label");

  auto* compare_cmd = app.add_subcommand("compare", "compare finished runs checkpoint by checkpoint");
  std::vector<std::string> compare_dirs;
  std::string compare_csv;
  compare_cmd->add_option("runs", compare_dirs, "two or more run output directories")->required();
  compare_cmd->add_option("--out", compare_csv, "also write the comparison as CSV");

  auto* diagnose_cmd = app.add_subcommand("diagnose", "report asymptotic diagnostics for a run");
  std::string diagnose_dir;
  diagnose_cmd->add_option("run", diagnose_dir, "run output directory")->required();

  auto* validate_cmd = app.add_subcommand("validate-schedule", "check endpoint growth for a config");
  std::string validate_path;
  validate_cmd->add_option("config", validate_path, "experiment config (JSON)")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("batchts");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (*run_cmd) {
      ExperimentConfig config = load_config(config_path);
      if (horizon) config.horizon = *horizon;
      if (replicates) config.replicates = *replicates;
      if (seed) config.master_seed = *seed;
      if (workers) config.workers = static_cast<int>(*workers);
      if (!schedule_str.empty()) config.schedule = parse_schedule_string(schedule_str);
      if (!arms_str.empty()) config.arms = parse_arms_string(arms_str);
      if (!method_str.empty()) config.prob_method = parse_prob_method_string(method_str);
      if (!out_dir.empty()) config.output_dir = out_dir;
      if (!label.empty()) config.label = label;
      config = config_from_json(config_to_json(config));  // re-validate after overrides

      const ExperimentOutput result = run_experiment(config);
      write_outputs(result, config.output_dir);
      out << "wrote " << config.output_dir << "/aggregate.csv, replicates.jsonl, metadata.json\n";
      out << "replicates " << config.replicates << ", horizon " << config.horizon
          << ", schedule " << config.schedule.name() << "\n";
      out << "final random regret  " << detail::stat_pm(result.aggregate.final_random_regret) << "\n";
      out << "final pseudo regret  " << detail::stat_pm(result.aggregate.final_pseudo_regret) << "\n";
      out << "final batches        " << detail::stat_pm(result.aggregate.final_batches) << "\n";
    } else if (*compare_cmd) {
      std::vector<RunOutput> runs;
      for (const std::string& dir : compare_dirs) runs.push_back(load_run(dir));
      compare_runs(runs, out, compare_csv);
    } else if (*diagnose_cmd) {
      const RunOutput run = load_run(diagnose_dir);
      diagnose_run(run, load_replicates(diagnose_dir), out);
    } else if (*validate_cmd) {
      validate_schedule(load_config(validate_path), out);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    err << "io error: " << e.what() << "\n";
    return 3;
  } catch (const quadrature_error& e) {
    err << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace batchts
