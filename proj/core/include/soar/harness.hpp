#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soar/agent.hpp"
#include "soar/atmosphere.hpp"
#include "soar/config.hpp"
#include "soar/flight_dynamics.hpp"

namespace soar {

// Closed-loop episode runner: arena containment autopilot, scripted and
// random scenarios, trace/θ-history recording, and the weight-convergence
// study across roll-outs.

enum class ScenarioKind { StillAir, ThermalBirth, ThermalDeath, MultiThermal };

const char* to_string(ScenarioKind kind);
std::optional<ScenarioKind> scenario_from_string(const std::string& name);

/// A fully specified episode environment. Scripted kinds pin the initial
/// thermal list; replacements for dead scripted thermals are drawn latent
/// (t_off beyond the episode) so a scripted death stays a death.
struct Scenario {
  ScenarioKind kind = ScenarioKind::StillAir;
  double duration = 300.0;  // s
  AtmosphereConfig atmosphere;
  std::vector<ThermalParams> scripted;  // empty: spawn N random thermals at t=0
  double start_x = 0.0;  // m, initial position (heading +x)
  double start_y = 0.0;
};

/// Builds the scenario named by `kind` from the run configuration.
/// duration_override, when positive, replaces cfg.sim.duration.
Scenario make_scenario(ScenarioKind kind, const RunConfig& cfg,
                       double duration_override = 0.0);

/// One row per (decimated) control step.
struct TraceRecord {
  double t = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double V = 0.0, gamma = 0.0, chi = 0.0;
  double mu = 0.0, beta = 0.0;  // controls applied during this step
  int action = 4;
  double reward = 0.0;
  double energy = 0.0;  // m, specific total energy at step start
  double w_x = 0.0, w_y = 0.0, w_z = 0.0;  // wind at step start
  bool autopilot = false;
};

struct ThetaSnapshot {
  long step = 0;
  AgentWeights weights;
};

struct EpisodeSummary {
  double duration_flown = 0.0;  // s, < duration only when aborted
  double energy_start = 0.0;    // m
  double energy_end = 0.0;      // m
  double sum_reward_dt = 0.0;   // m, integral of the reward
  double mean_reward = 0.0;     // m/s
  double time_in_updraft_fraction = 0.0;
  long stall_steps = 0;
  long autopilot_steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// Everything the episode loop knows about one completed control step.
struct StepInfo {
  long step = 0;
  double t = 0.0;                  // s, step start
  const AircraftState* state = nullptr;     // at step start
  const ControlState* controls = nullptr;   // applied during the step
  const Observation* obs = nullptr;         // at step start
  Action action;
  double reward = 0.0;
  double td_error = 0.0;           // 0 when learning was suspended
  bool override_active = false;    // autopilot or launch hold
  const AgentWeights* theta = nullptr;      // after the update
};

struct EpisodeOptions {
  bool record_trace = false;
  bool record_theta = false;  // snapshots at cfg.sim.theta_snapshot_period
  std::optional<AgentWeights> initial_theta;  // unset: baseline_theta(cfg)
  bool agent_enabled = true;  // false: hold trim controls (baseline glide)
  // Overrides the atmosphere's {spawn, noise} streams; the convergence study
  // uses this to fly every roll-out through the same wind realization
  // (common random numbers), so the spread across roll-outs reflects the
  // learning, not the weather.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> field_seeds;
  std::function<void(const StepInfo&)> on_step;  // observer, may be empty
};

/// Default weight initialization: every block's constant weight carries the
/// steady-glide energy rate over (1 - eta), the value of the trimmed glide.
/// Starting from all zeros instead leaves unvisited actions looking
/// optimistic against the strictly negative rewards, which drives a
/// systematic churn through the action set until the controls saturate.
AgentWeights baseline_theta(const RunConfig& cfg);

struct EpisodeResult {
  EpisodeSummary summary;
  AircraftState final_state;
  AgentWeights final_theta;
  std::vector<TraceRecord> trace;
  std::vector<ThetaSnapshot> theta_history;
};

/// Runs one closed-loop episode at the configured control period.
/// Deterministic in (scenario, cfg, seed).
EpisodeResult run_episode(const Scenario& scenario, const RunConfig& cfg,
                          std::uint64_t seed, const EpisodeOptions& opts = {});

/// Per-step agent settings actually applied by the episode loop. When
/// cfg.sim.scale_rates_with_dt is set and dt differs from 1 ms, the rates
/// are rescaled so behaviour per simulated second stays comparable.
AgentConfig effective_agent_config(const RunConfig& cfg);

/// Arena containment: engages when the glider leaves the arena, steers the
/// course toward the center one control increment at a time, and releases
/// inside the re-entry radius.
class Autopilot {
 public:
  /// trim_speed and dt drive the hand-back condition: the agent resumes only
  /// once the aircraft is back inside, wings level and settled near the trim
  /// speed, so it never inherits a turn transient.
  Autopilot(double arena_radius, double reentry_fraction, double trim_speed,
            double dt)
      : arena_radius_(arena_radius),
        reentry_radius_(reentry_fraction * arena_radius),
        trim_speed_(trim_speed),
        settle_steps_(std::max(1L, std::lround(5.0 / dt))) {}

  /// Updates the engage/release hysteresis; returns whether the autopilot
  /// owns this control step.
  bool update(const AircraftState& state, const ControlState& ctrl);

  /// The increment action steering back toward the arena center.
  Action act(const AircraftState& state, const ControlState& ctrl,
             const AgentConfig& agent_cfg, const AircraftConfig& aircraft_cfg) const;

  bool active() const { return active_; }

 private:
  double arena_radius_;
  double reentry_radius_;
  double trim_speed_;
  long settle_steps_;
  long in_band_ = 0;
  bool active_ = false;
};

struct ThetaOptEstimate {
  AgentWeights theta;
  double cross_run_spread = 0.0;  // relative, across the reference runs
  bool drift_warning = false;     // post-settle drift exceeded 25 %
};

/// Empirical converged weights: averages theta over [settle_time, end] of
/// n_runs reference episodes with distinct seed streams. Episodes start from
/// theta0 when given, else from baseline_theta(cfg).
ThetaOptEstimate estimate_theta_opt(const Scenario& scenario, const RunConfig& cfg,
                                    int n_runs, double settle_time,
                                    std::uint64_t seed,
                                    const std::optional<AgentWeights>& theta0 = {});

struct ConvergenceReport {
  std::vector<double> times;      // s, snapshot instants
  std::vector<double> mean_dist;  // ||theta_t - theta_opt||_2 across roll-outs
  std::vector<double> std_dist;
  double threshold = 0.2;
  std::optional<double> adaptation_time;  // first mean below threshold * initial
};

/// Distance statistics over per-roll-out snapshot series (exposed for tests).
ConvergenceReport aggregate_convergence(
    const std::vector<std::vector<double>>& distances,
    const std::vector<double>& times, double threshold);

/// Runs n_rollouts episodes (in parallel) from theta0 (defaults to
/// baseline_theta) and reports the per-snapshot mean/std of the distance to
/// theta_opt. Requires n >= 2.
ConvergenceReport convergence_study(const Scenario& scenario, const RunConfig& cfg,
                                    const AgentWeights& theta_opt, int n_rollouts,
                                    std::uint64_t seed,
                                    const std::optional<AgentWeights>& theta0 = {});

/// The regime a scenario's convergence roll-outs start from: the scripted
/// events change the environment away from this preceding one.
ScenarioKind precursor_kind(ScenarioKind kind);

double theta_distance(const AgentWeights& a, const AgentWeights& b);

/// Fixed trace.csv header.
extern const char* const kTraceHeader;

std::string trace_to_csv(const std::vector<TraceRecord>& trace);
std::string theta_history_to_csv(const std::vector<ThetaSnapshot>& history);

}  // namespace soar
