#include "soar/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "soar/config.hpp"
#include "soar/harness.hpp"
#include "soar/selfcheck.hpp"

namespace soar {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct CommonOpts {
  std::string scenario = "still-air";
  std::string config_path;
  std::string out_dir = "out";
  std::string theta_in;
  std::uint64_t seed = 0;
  double dt_override = 0.0;
  double duration_override = 0.0;
};

/// Reads agent weights from a CSV produced by `run` (theta_final.csv, or any
/// theta.csv whose last row is taken; a leading step column is accepted).
AgentWeights load_theta(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open theta file '" + path + "'");
  std::string line, last;
  std::getline(f, line);  // header or first data row
  if (line.find("theta") == std::string::npos) last = line;
  while (std::getline(f, line)) {
    if (!line.empty()) last = line;
  }
  std::vector<double> vals;
  std::stringstream ss(last);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  AgentWeights w;
  if (vals.size() == kNumWeights + 1) {
    std::copy(vals.begin() + 1, vals.end(), w.theta.begin());
  } else if (vals.size() == kNumWeights) {
    std::copy(vals.begin(), vals.end(), w.theta.begin());
  } else {
    throw std::runtime_error("theta file '" + path + "' does not hold " +
                             std::to_string(kNumWeights) + " weights");
  }
  return w;
}

std::string theta_row_csv(const AgentWeights& w) {
  std::string out;
  char buf[32];
  for (int i = 0; i < kNumWeights; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", w.theta[i]);
    out += buf;
    out += (i + 1 < kNumWeights) ? "," : "\n";
  }
  return out;
}

RunConfig load_config(const CommonOpts& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : parse_config(o.config_path);
  if (o.config_path.empty()) resolve_angles(cfg);
  if (o.dt_override > 0.0) cfg.sim.dt = o.dt_override;
  if (o.duration_override > 0.0) cfg.sim.duration = o.duration_override;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  for (const auto& [key, value] : config_items(cfg)) j[key] = value;
  return j;
}

ordered_json summary_json(const EpisodeSummary& s) {
  ordered_json j;
  j["duration_flown_s"] = s.duration_flown;
  j["energy_start_m"] = s.energy_start;
  j["energy_end_m"] = s.energy_end;
  j["sum_reward_dt_m"] = s.sum_reward_dt;
  j["mean_reward_mps"] = s.mean_reward;
  j["time_in_updraft_fraction"] = s.time_in_updraft_fraction;
  j["stall_steps"] = s.stall_steps;
  j["autopilot_steps"] = s.autopilot_steps;
  j["aborted"] = s.aborted;
  j["abort_reason"] = s.abort_reason;
  return j;
}

int cmd_run(const CommonOpts& o) {
  const auto kind = scenario_from_string(o.scenario);
  if (!kind) {
    std::cerr << "unknown scenario '" << o.scenario << "'\n";
    return 1;
  }
  const RunConfig cfg = load_config(o);
  const Scenario sc = make_scenario(*kind, cfg);

  EpisodeOptions opts;
  opts.record_trace = true;
  opts.record_theta = true;
  if (!o.theta_in.empty()) opts.initial_theta = load_theta(o.theta_in);
  const EpisodeResult res = run_episode(sc, cfg, o.seed, opts);

  fs::create_directories(o.out_dir);
  write_file(fs::path(o.out_dir) / "trace.csv", trace_to_csv(res.trace));
  write_file(fs::path(o.out_dir) / "theta.csv",
             theta_history_to_csv(res.theta_history));
  write_file(fs::path(o.out_dir) / "theta_final.csv", theta_row_csv(res.final_theta));
  write_file(fs::path(o.out_dir) / "config.resolved", emit_config(cfg));

  ordered_json j;
  j["command"] = "run";
  j["scenario"] = o.scenario;
  j["seed"] = o.seed;
  j["episode"] = summary_json(res.summary);
  j["outputs"] = {{"trace", "trace.csv"},
                  {"theta", "theta.csv"},
                  {"config", "config.resolved"}};
  j["config"] = config_json(cfg);
  write_file(fs::path(o.out_dir) / "summary.json", j.dump(2) + "\n");

  std::cout << "run " << o.scenario << " seed " << o.seed << ": flew "
            << res.summary.duration_flown << " s, E " << res.summary.energy_start
            << " -> " << res.summary.energy_end << " m"
            << (res.summary.aborted ? " (aborted: " + res.summary.abort_reason + ")"
                                    : "")
            << "\n";
  return 0;
}

int cmd_converge(const CommonOpts& o, int rollouts) {
  const auto kind = scenario_from_string(o.scenario);
  if (!kind) {
    std::cerr << "unknown scenario '" << o.scenario << "'\n";
    return 1;
  }
  RunConfig cfg = load_config(o);
  if (rollouts > 0) cfg.converge.rollouts = rollouts;

  // Roll-outs adapt from the preceding regime: estimate its converged
  // weights first, then the target regime's, then track the migration.
  const RunConfig& study_cfg = cfg;

  const ScenarioKind pre_kind = precursor_kind(*kind);
  const Scenario pre_scenario =
      make_scenario(pre_kind, study_cfg, cfg.converge.opt_duration);
  const auto pre = estimate_theta_opt(pre_scenario, study_cfg, cfg.converge.opt_runs,
                                      cfg.converge.opt_settle, o.seed ^ 0x9e37);

  const Scenario opt_scenario =
      make_scenario(*kind, study_cfg, cfg.converge.opt_duration);
  const auto opt = estimate_theta_opt(opt_scenario, study_cfg, cfg.converge.opt_runs,
                                      cfg.converge.opt_settle, o.seed, pre.theta);

  const Scenario sc = make_scenario(*kind, study_cfg, cfg.converge.duration);
  const auto report = convergence_study(sc, study_cfg, opt.theta,
                                        cfg.converge.rollouts, o.seed, pre.theta);

  fs::create_directories(o.out_dir);
  std::string csv = "t,mean_dist,std_dist\n";
  for (size_t i = 0; i < report.times.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", report.times[i],
                  report.mean_dist[i], report.std_dist[i]);
    csv += buf;
  }
  write_file(fs::path(o.out_dir) / "convergence.csv", csv);

  std::string theta_csv;
  for (int i = 0; i < kNumWeights; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", opt.theta.theta[i]);
    theta_csv += buf;
    theta_csv += (i + 1 < kNumWeights) ? ',' : '\n';
  }
  write_file(fs::path(o.out_dir) / "theta_opt.csv", theta_csv);
  write_file(fs::path(o.out_dir) / "config.resolved", emit_config(cfg));

  ordered_json j;
  j["command"] = "converge";
  j["scenario"] = o.scenario;
  j["seed"] = o.seed;
  j["rollouts"] = cfg.converge.rollouts;
  j["threshold"] = report.threshold;
  j["initial_distance"] = report.mean_dist.empty() ? 0.0 : report.mean_dist.front();
  j["final_mean_distance"] = report.mean_dist.empty() ? 0.0 : report.mean_dist.back();
  if (report.adaptation_time) {
    j["adaptation_time_s"] = *report.adaptation_time;
  } else {
    j["adaptation_time_s"] = nullptr;
  }
  j["theta_opt_cross_run_spread"] = opt.cross_run_spread;
  j["theta_opt_drift_warning"] = opt.drift_warning;
  j["outputs"] = {{"convergence", "convergence.csv"},
                  {"theta_opt", "theta_opt.csv"},
                  {"config", "config.resolved"}};
  j["config"] = config_json(cfg);
  write_file(fs::path(o.out_dir) / "summary.json", j.dump(2) + "\n");

  std::cout << "converge " << o.scenario << ": " << cfg.converge.rollouts
            << " roll-outs, adaptation time ";
  if (report.adaptation_time) {
    std::cout << *report.adaptation_time << " s\n";
  } else {
    std::cout << "not reached\n";
  }
  if (opt.drift_warning) {
    std::cerr << "warning: theta_opt estimate drifted in the settle window\n";
  }
  return 0;
}

int cmd_validate(const CommonOpts& o) {
  const RunConfig cfg = load_config(o);
  const auto checks = run_selfchecks(cfg);
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
              << "\n";
    all = all && c.passed;
  }
  std::cout << (all ? "all self-checks passed\n" : "self-checks FAILED\n");
  return all ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Thermal-soaring glider simulator with an online Q-learning "
               "controller"};
  app.require_subcommand(1);

  CommonOpts o;

  const auto add_common = [&](CLI::App* cmd, bool with_scenario) {
    if (with_scenario) {
      cmd->add_option("--scenario", o.scenario,
                      "still-air | thermal-birth | thermal-death | multi-thermal")
          ->default_val("still-air");
    }
    cmd->add_option("--config", o.config_path, "key = value configuration file");
    cmd->add_option("--seed", o.seed, "master seed")->default_val(0);
    cmd->add_option("--out", o.out_dir, "output directory")->default_val("out");
    cmd->add_option("--dt", o.dt_override, "control period override, s");
    cmd->add_option("--duration", o.duration_override, "episode duration override, s");
  };

  auto* run = app.add_subcommand("run", "run one episode and write its artifacts");
  add_common(run, true);
  run->add_option("--theta-in", o.theta_in,
                  "start from pre-trained weights (CSV from a previous run)");

  int rollouts = 0;
  auto* converge =
      app.add_subcommand("converge", "estimate theta_opt and run the "
                                     "weight-convergence study");
  add_common(converge, true);
  converge->add_option("--rollouts", rollouts, "number of roll-outs (>= 2)")
      ->check(CLI::Range(2, 10000));

  auto* validate = app.add_subcommand("validate", "run the physics self-checks");
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (converge->parsed()) return cmd_converge(o, rollouts);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace soar
