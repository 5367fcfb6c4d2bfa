#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "soar/agent.hpp"
#include "soar/atmosphere.hpp"
#include "soar/flight_dynamics.hpp"

namespace soar {

/// Episode-level settings.
struct SimConfig {
  double dt = 0.001;        // s, control period
  double duration = 300.0;  // s
  int decimation = 10;      // trace every Nth control step
  double theta_snapshot_period = 0.5;  // s
  double init_z = 300.0;    // m
  double init_V = 15.0;     // m/s
  bool scale_rates_with_dt = true;  // keep per-second behaviour when dt != 1 ms
  double autopilot_reentry = 0.95;  // disengage below this fraction of the radius
};

/// Parameters of the scripted single-thermal scenarios.
struct ScenarioScript {
  double w_star = 2.56;   // m/s
  double z_i = 1401.0;    // m
  double xi = 0.5;
  double birth_lead = 300.0;   // m ahead of the initial course
  double birth_t_off = 30.0;   // s, latency before the scripted birth
  double birth_t_life = 500.0; // s
  double death_time = 240.0;   // s, scripted death of the occupied thermal
};

/// Convergence-study settings.
struct ConvergeConfig {
  int rollouts = 50;
  double duration = 240.0;      // s, tracked length of each roll-out
  double opt_duration = 400.0;  // s, length of the reference runs
  double opt_settle = 240.0;    // s, average theta from here to the end
  int opt_runs = 2;
  double adapt_threshold = 0.2;  // fraction of the initial distance
};

/// Degree-valued keys as written in the config file. Authoritative so that
/// emit/parse round-trips are bit-exact; the radian fields in the nested
/// configs are derived from these by resolve_angles().
struct AngleSettings {
  double alpha0 = -2.0;
  double beta_max = 45.0;
  double mu_max = 25.0;
  double delta_mu = 0.003;
  double delta_beta = 0.003;
  double c_mu = 10.0;
  double c_beta = 15.0;
};

/// Every tunable of the toolkit, resolved against documented defaults.
struct RunConfig {
  AtmosphereConfig atmosphere;
  AircraftConfig aircraft;
  AgentConfig agent;
  SimConfig sim;
  ScenarioScript script;
  ConvergeConfig converge;
  AngleSettings angles;
};

/// Recomputes the radian-valued fields from the degree settings. parse_config
/// calls this; call it again after editing RunConfig::angles directly.
void resolve_angles(RunConfig& cfg);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses a line-oriented `key = value` file. Blank lines and lines starting
/// with '#' are ignored. Unknown keys, malformed lines and out-of-range
/// values raise ConfigError with the offending line number. Unset keys keep
/// their defaults.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<string>");

/// Serializes every key; parse_config_text(emit_config(c)) reproduces c
/// bit-exactly.
std::string emit_config(const RunConfig& cfg);

/// Flat (key, value-string) view of the resolved config, registry order.
std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg);

}  // namespace soar
