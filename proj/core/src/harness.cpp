#include "soar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace soar {

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::StillAir: return "still-air";
    case ScenarioKind::ThermalBirth: return "thermal-birth";
    case ScenarioKind::ThermalDeath: return "thermal-death";
    case ScenarioKind::MultiThermal: return "multi-thermal";
  }
  return "?";
}

std::optional<ScenarioKind> scenario_from_string(const std::string& name) {
  if (name == "still-air") return ScenarioKind::StillAir;
  if (name == "thermal-birth") return ScenarioKind::ThermalBirth;
  if (name == "thermal-death") return ScenarioKind::ThermalDeath;
  if (name == "multi-thermal") return ScenarioKind::MultiThermal;
  return std::nullopt;
}

Scenario make_scenario(ScenarioKind kind, const RunConfig& cfg,
                       double duration_override) {
  Scenario sc;
  sc.kind = kind;
  sc.duration = duration_override > 0.0 ? duration_override : cfg.sim.duration;
  sc.atmosphere = cfg.atmosphere;

  const auto scripted_thermal = [&](double t_off, double t_life) {
    ThermalParams th;
    // At the arena center, birth_lead ahead of the glider's start on the
    // initial course. The containment autopilot aims re-entry legs at the
    // center, so the trajectory keeps crossing the thermal.
    th.x_th = 0.0;
    th.y_th = 0.0;
    th.w_star = cfg.script.w_star;
    th.z_i = cfg.script.z_i;
    th.xi = cfg.script.xi;
    th.v_drift_x = 0.0;
    th.v_drift_y = 0.0;
    th.t_birth = 0.0;
    th.t_off = t_off;
    th.t_life = t_life;
    return th;
  };

  switch (kind) {
    case ScenarioKind::StillAir:
      sc.atmosphere.n_thermals = 0;
      break;
    case ScenarioKind::ThermalBirth:
      sc.scripted = {scripted_thermal(cfg.script.birth_t_off, cfg.script.birth_t_life)};
      sc.start_x = -cfg.script.birth_lead;
      break;
    case ScenarioKind::ThermalDeath:
      sc.scripted = {scripted_thermal(0.0, cfg.script.death_time)};
      sc.start_x = -cfg.script.birth_lead;
      break;
    case ScenarioKind::MultiThermal:
      break;  // random population from the spawn stream
  }

  if (!sc.scripted.empty()) {
    // Replacements for a dead scripted thermal stay latent past the episode,
    // so scripted births and deaths are the only thermal events.
    sc.atmosphere.n_thermals = static_cast<int>(sc.scripted.size());
    sc.atmosphere.t_off_min = sc.duration + 60.0;
    sc.atmosphere.t_off_max = sc.duration + 120.0;
  }
  return sc;
}

AgentConfig effective_agent_config(const RunConfig& cfg) {
  AgentConfig a = cfg.agent;
  if (cfg.sim.scale_rates_with_dt) {
    const double scale = cfg.sim.dt / 0.001;
    if (scale != 1.0) {
      a.alpha = cfg.agent.alpha * scale;
      a.delta_mu = cfg.agent.delta_mu * scale;
      a.delta_beta = cfg.agent.delta_beta * scale;
      a.eta = std::max(0.0, 1.0 - (1.0 - cfg.agent.eta) * scale);
      a.symmetry_decay = std::min(1.0, cfg.agent.symmetry_decay * scale);
    }
  }
  return a;
}

bool Autopilot::update(const AircraftState& state, const ControlState& ctrl) {
  const double r = std::hypot(state.x, state.y);
  if (!active_ && r > arena_radius_) {
    active_ = true;
    in_band_ = 0;
  }
  if (!active_) return false;
  // Release only once back inside, wings level and settled at trim speed;
  // handing over mid-transient parks the agent in the leftover turn.
  constexpr double kLevel = 0.5 * M_PI / 180.0;
  const bool calm = r < reentry_radius_ && std::abs(ctrl.mu) < kLevel &&
                    std::abs(ctrl.beta) < kLevel &&
                    std::abs(state.V - trim_speed_) < 0.08 * trim_speed_;
  in_band_ = calm ? in_band_ + 1 : 0;
  if (in_band_ >= settle_steps_) active_ = false;
  return active_;
}

Action Autopilot::act(const AircraftState& state, const ControlState& ctrl,
                      const AgentConfig& agent_cfg,
                      const AircraftConfig& aircraft_cfg) const {
  // Bank toward the arena center, proportional to the heading error and
  // saturating at mu_max; hold zero sideslip. One increment per step.
  // Once the course points inward the command becomes wings-level, so the
  // aircraft is handed over in a neutral configuration heading back through
  // the arena interior.
  const double desired_course = std::atan2(-state.y, -state.x);
  double err = wrap_angle(desired_course - state.chi);
  // Near-reversals have no shorter side; commit to the positive-bank turn
  // (a consistent circling direction, as a pilot would).
  if (err < -2.6) err += 2.0 * M_PI;
  double mu_cmd = 0.0;
  if (std::abs(err) > 0.15) {
    constexpr double kErrSat = 0.5;  // rad of heading error for full bank
    mu_cmd = aircraft_cfg.mu_max * std::clamp(err / kErrSat, -1.0, 1.0);
  }

  int mu_sign = 0;
  if (mu_cmd - ctrl.mu > 0.5 * agent_cfg.delta_mu) mu_sign = 1;
  else if (mu_cmd - ctrl.mu < -0.5 * agent_cfg.delta_mu) mu_sign = -1;

  int beta_sign = 0;
  if (ctrl.beta > 0.5 * agent_cfg.delta_beta) beta_sign = -1;
  else if (ctrl.beta < -0.5 * agent_cfg.delta_beta) beta_sign = 1;

  return Action::from_signs(mu_sign, beta_sign);
}

AgentWeights baseline_theta(const RunConfig& cfg) {
  return baseline_weights(effective_agent_config(cfg), cfg.aircraft);
}

EpisodeResult run_episode(const Scenario& scenario, const RunConfig& cfg,
                          std::uint64_t seed, const EpisodeOptions& opts) {
  const AgentConfig agent_cfg = effective_agent_config(cfg);
  const AircraftConfig& ac = cfg.aircraft;
  const double dt = cfg.sim.dt;
  const long n_steps = static_cast<long>(std::floor(scenario.duration / dt + 1e-9));
  const long snap_every =
      std::max(1L, std::lround(cfg.sim.theta_snapshot_period / dt));

  Rng agent_rng(derive_seed(seed, kStreamAgent));
  Rng obs_rng(derive_seed(seed, kStreamObsNoise));

  const std::uint64_t spawn_seed =
      opts.field_seeds ? opts.field_seeds->first : derive_seed(seed, kStreamSpawn);
  const std::uint64_t noise_seed =
      opts.field_seeds ? opts.field_seeds->second : derive_seed(seed, kStreamNoise);
  AtmosphereField field =
      scenario.scripted.empty()
          ? AtmosphereField(scenario.atmosphere, spawn_seed, noise_seed)
          : AtmosphereField(scenario.atmosphere, scenario.scripted, spawn_seed,
                            noise_seed);

  AircraftState state;
  state.x = scenario.start_x;
  state.y = scenario.start_y;
  state.z = cfg.sim.init_z;
  state.V = cfg.sim.init_V;
  ControlState ctrl;
  ctrl.alpha = trim_alpha(ac);

  AgentWeights theta =
      opts.initial_theta ? *opts.initial_theta : baseline_theta(cfg);
  const auto trim_eq = glide_equilibrium(ac, ctrl.alpha);
  Autopilot autopilot(scenario.atmosphere.arena_radius, cfg.sim.autopilot_reentry,
                      trim_eq.V, dt);

  const auto wind_fn = [&field](double x, double y, double z, double t) {
    return field.wind_at(x, y, z, t);
  };

  // The climb-rate channel is a netto total-energy variometer (standard
  // soaring instrumentation): z_dot + V V_dot / g plus the known polar sink
  // at the current speed. Total-energy compensation removes the
  // pitch-exchange transients, which carry no energy information; the polar
  // reference removes the airframe's own sink, so the channel reads the air
  // mass: zero in still air, the updraft strength inside a thermal, and the
  // (small) extra drag sink while maneuvering.
  const double trim_cl = ac.cl_alpha * (ctrl.alpha - ac.alpha0);
  const double polar_cd = ac.cd0 + ac.induced_k * trim_cl * trim_cl;
  double vario = 0.0;  // low-pass filter state of the netto channel
  const auto observe = [&](const AircraftState& s, const ControlState& c,
                           double t) {
    const WindVector w = field.wind_at(s.x, s.y, s.z, t);
    const StateDerivative d = state_derivative(s, c, w, ac);
    const double polar_sink = 0.5 * ac.rho_air * s.V * s.V * ac.wing_area *
                              polar_cd * s.V / (ac.mass * kGravity);
    double netto = d.z_dot + s.V * d.V_dot / kGravity + polar_sink;
    if (agent_cfg.obs_noise_std > 0.0) {
      netto += agent_cfg.obs_noise_std * standard_normal(obs_rng);
    }
    if (agent_cfg.vario_tau > 0.0) {
      vario += (dt / (agent_cfg.vario_tau + dt)) * (netto - vario);
    } else {
      vario = netto;
    }
    Observation o{vario, d.gamma_dot, c.mu, c.beta};
    if (agent_cfg.obs_noise_std > 0.0) {
      o.gamma_dot += agent_cfg.obs_noise_std * standard_normal(obs_rng);
    }
    return o;
  };

  EpisodeResult result;
  result.summary.energy_start = total_energy(state);

  if (opts.record_trace) {
    result.trace.reserve(static_cast<size_t>(n_steps / cfg.sim.decimation + 1));
  }
  if (opts.record_theta) {
    result.theta_history.push_back({0, theta});
  }

  Observation obs = observe(state, ctrl, 0.0);
  long in_updraft = 0;
  double sum_reward = 0.0;
  long steps_done = 0;

  // Launch stabilization: the init speed sits well above the trim glide, and
  // the resulting phugoid swings the energy rate far harder than any control
  // consequence. Hold trim and suspend learning until the transient has rung
  // down, then hand over for good (same reasoning as the autopilot override).
  const long settle_steps = std::max(1L, std::lround(5.0 / dt));
  bool launch_hold = true;
  long in_band = 0;

  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const WindVector wind_here = field.wind_at(state.x, state.y, state.z, t);

    if (launch_hold) {
      in_band = std::abs(state.V - trim_eq.V) < 0.08 * trim_eq.V ? in_band + 1 : 0;
      if (in_band >= settle_steps) launch_hold = false;
    }

    const bool ap_active = autopilot.update(state, ctrl) || launch_hold;
    Action action{4};
    if (autopilot.active()) {
      action = autopilot.act(state, ctrl, agent_cfg, ac);
      ++result.summary.autopilot_steps;
    } else if (launch_hold) {
      ++result.summary.autopilot_steps;  // hold (0, 0): stay at trim
    } else if (opts.agent_enabled) {
      action = select_action(theta, obs, agent_cfg.epsilon, agent_rng, agent_cfg);
    }
    const ControlState new_ctrl = apply_action(ctrl, action, agent_cfg, ac);

    const StepResult step = integrate_step(state, new_ctrl, wind_fn, t, dt, ac);
    if (step.stalled) ++result.summary.stall_steps;

    field.step(t, dt);
    const double t_next = t + dt;

    // Reward from the realized step so the episode sum telescopes to the
    // energy difference exactly: r dt = dz + (V+V') dV / (2g).
    const double r = reward((step.state.z - state.z) / dt,
                            0.5 * (state.V + step.state.V),
                            (step.state.V - state.V) / dt);
    sum_reward += r;

    const Observation next_obs = observe(step.state, new_ctrl, t_next);
    double delta = 0.0;
    if (!ap_active && opts.agent_enabled) {
      // Learning is suspended while an override steers: the containment
      // turns are one-sided maneuvers whose cost would otherwise leak into
      // the odd bank weights and bias the straight-flight policy.
      delta = counterfactual_update(theta, obs, action, r, next_obs, agent_cfg, ac);
    }

    if (opts.on_step) {
      StepInfo info;
      info.step = k;
      info.t = t;
      info.state = &state;
      info.controls = &new_ctrl;
      info.obs = &obs;
      info.action = action;
      info.reward = r;
      info.td_error = delta;
      info.override_active = ap_active;
      info.theta = &theta;
      opts.on_step(info);
    }

    if ((wind_here.w_z - field.noise().n_z) > 0.1) ++in_updraft;

    if (opts.record_trace && (k + 1) % cfg.sim.decimation == 0) {
      result.trace.push_back({t, state.x, state.y, state.z, state.V, state.gamma,
                              state.chi, new_ctrl.mu, new_ctrl.beta, action.index,
                              r, total_energy(state), wind_here.w_x, wind_here.w_y,
                              wind_here.w_z, ap_active});
    }
    if (opts.record_theta && (k + 1) % snap_every == 0) {
      result.theta_history.push_back({k + 1, theta});
    }

    state = step.state;
    ctrl = new_ctrl;
    obs = next_obs;
    ++steps_done;

    if (state.z <= 0.0) {
      result.summary.aborted = true;
      result.summary.abort_reason = "ground-impact";
      break;
    }
  }

  result.summary.duration_flown = static_cast<double>(steps_done) * dt;
  result.summary.energy_end = total_energy(state);
  result.summary.sum_reward_dt = sum_reward * dt;
  result.summary.mean_reward = steps_done > 0 ? sum_reward / steps_done : 0.0;
  result.summary.time_in_updraft_fraction =
      steps_done > 0 ? static_cast<double>(in_updraft) / steps_done : 0.0;
  result.final_state = state;
  result.final_theta = theta;
  return result;
}

double theta_distance(const AgentWeights& a, const AgentWeights& b) {
  double s = 0.0;
  for (int i = 0; i < kNumWeights; ++i) {
    const double d = a.theta[i] - b.theta[i];
    s += d * d;
  }
  return std::sqrt(s);
}

ScenarioKind precursor_kind(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::StillAir: return ScenarioKind::ThermalBirth;
    case ScenarioKind::ThermalBirth: return ScenarioKind::StillAir;
    case ScenarioKind::ThermalDeath: return ScenarioKind::ThermalBirth;
    case ScenarioKind::MultiThermal: return ScenarioKind::StillAir;
  }
  return ScenarioKind::StillAir;
}

ThetaOptEstimate estimate_theta_opt(const Scenario& scenario, const RunConfig& cfg,
                                    int n_runs, double settle_time,
                                    std::uint64_t seed,
                                    const std::optional<AgentWeights>& theta0) {
  if (n_runs < 1) throw std::invalid_argument("estimate_theta_opt: n_runs >= 1");
  if (settle_time >= scenario.duration) {
    throw std::invalid_argument("estimate_theta_opt: settle_time must precede the end");
  }

  RunConfig run_cfg = cfg;
  run_cfg.sim.duration = scenario.duration;

  std::vector<AgentWeights> run_means;
  bool drift = false;
  const std::pair<std::uint64_t, std::uint64_t> field_seeds{
      derive_seed(seed, kStreamSpawn), derive_seed(seed, kStreamNoise)};
  for (int i = 0; i < n_runs; ++i) {
    EpisodeOptions opts;
    opts.record_theta = true;
    opts.initial_theta = theta0;
    opts.field_seeds = field_seeds;
    const auto res = run_episode(scenario, run_cfg,
                                 derive_seed(seed, 0x2000 + static_cast<std::uint64_t>(i)),
                                 opts);

    AgentWeights mean{}, half_a{}, half_b{};
    long n = 0, na = 0, nb = 0;
    const long settle_step = std::lround(settle_time / cfg.sim.dt);
    std::vector<const ThetaSnapshot*> window;
    for (const auto& snap : res.theta_history) {
      if (snap.step < settle_step) continue;
      window.push_back(&snap);
    }
    const size_t half = window.size() / 2;
    for (size_t w = 0; w < window.size(); ++w) {
      for (int j = 0; j < kNumWeights; ++j) {
        mean.theta[j] += window[w]->weights.theta[j];
        if (w < half) half_a.theta[j] += window[w]->weights.theta[j];
        else half_b.theta[j] += window[w]->weights.theta[j];
      }
      ++n;
      w < half ? ++na : ++nb;
    }
    if (n == 0) throw std::runtime_error("estimate_theta_opt: empty settle window");
    for (int j = 0; j < kNumWeights; ++j) mean.theta[j] /= n;
    if (na > 0 && nb > 0) {
      for (int j = 0; j < kNumWeights; ++j) {
        half_a.theta[j] /= na;
        half_b.theta[j] /= nb;
      }
      const double norm = theta_distance(mean, AgentWeights{});
      if (norm > 0.0 && theta_distance(half_a, half_b) / norm > 0.25) drift = true;
    }
    run_means.push_back(mean);
  }

  ThetaOptEstimate est;
  for (const auto& m : run_means) {
    for (int j = 0; j < kNumWeights; ++j) est.theta.theta[j] += m.theta[j];
  }
  for (int j = 0; j < kNumWeights; ++j) {
    est.theta.theta[j] /= static_cast<double>(run_means.size());
  }
  est.drift_warning = drift;
  if (run_means.size() >= 2) {
    double spread = 0.0;
    for (const auto& m : run_means) {
      spread = std::max(spread, theta_distance(m, est.theta));
    }
    const double norm = theta_distance(est.theta, AgentWeights{});
    est.cross_run_spread = norm > 0.0 ? spread / norm : 0.0;
  }
  return est;
}

ConvergenceReport aggregate_convergence(
    const std::vector<std::vector<double>>& distances,
    const std::vector<double>& times, double threshold) {
  if (distances.size() < 2) {
    throw std::invalid_argument("aggregate_convergence: need >= 2 roll-outs");
  }
  size_t len = times.size();
  for (const auto& d : distances) len = std::min(len, d.size());

  ConvergenceReport rep;
  rep.threshold = threshold;
  rep.times.assign(times.begin(), times.begin() + len);
  rep.mean_dist.resize(len);
  rep.std_dist.resize(len);
  const double n = static_cast<double>(distances.size());
  for (size_t b = 0; b < len; ++b) {
    double mean = 0.0;
    for (const auto& d : distances) mean += d[b];
    mean /= n;
    double var = 0.0;
    for (const auto& d : distances) var += (d[b] - mean) * (d[b] - mean);
    var /= (n - 1.0);
    rep.mean_dist[b] = mean;
    rep.std_dist[b] = std::sqrt(var);
  }
  if (len > 0) {
    const double initial = rep.mean_dist[0];
    for (size_t b = 0; b < len; ++b) {
      if (rep.mean_dist[b] <= threshold * initial) {
        rep.adaptation_time = rep.times[b];
        break;
      }
    }
  }
  return rep;
}

ConvergenceReport convergence_study(const Scenario& scenario, const RunConfig& cfg,
                                    const AgentWeights& theta_opt, int n_rollouts,
                                    std::uint64_t seed,
                                    const std::optional<AgentWeights>& theta0) {
  if (n_rollouts < 2) {
    throw std::invalid_argument("convergence_study: need >= 2 roll-outs");
  }

  RunConfig run_cfg = cfg;
  run_cfg.sim.duration = scenario.duration;

  std::vector<std::vector<double>> distances(n_rollouts);
  std::atomic<int> next{0};
  const unsigned n_workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(n_rollouts));

  const auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_rollouts) return;
      EpisodeOptions opts;
      opts.record_theta = true;
      opts.initial_theta = theta0;
      // Common random numbers: every roll-out flies the same wind
      // realization, so the spread across roll-outs reflects the learning,
      // not the weather.
      opts.field_seeds = {derive_seed(seed, kStreamSpawn),
                          derive_seed(seed, kStreamNoise)};
      const auto res =
          run_episode(scenario, run_cfg,
                      derive_seed(seed, kStreamRolloutBase + static_cast<std::uint64_t>(i)),
                      opts);
      auto& dist = distances[i];
      dist.reserve(res.theta_history.size());
      for (const auto& snap : res.theta_history) {
        dist.push_back(theta_distance(snap.weights, theta_opt));
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  size_t len = distances[0].size();
  for (const auto& d : distances) len = std::min(len, d.size());
  std::vector<double> times(len);
  const long snap_every =
      std::max(1L, std::lround(cfg.sim.theta_snapshot_period / cfg.sim.dt));
  for (size_t b = 0; b < len; ++b) {
    times[b] = static_cast<double>(b) * static_cast<double>(snap_every) * cfg.sim.dt;
  }
  return aggregate_convergence(distances, times, cfg.converge.adapt_threshold);
}

const char* const kTraceHeader = "t,x,y,z,V,gamma,chi,mu,beta,action,reward,E,wx,wy,wz,ap";

namespace {

void append_csv_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : trace) {
    append_csv_double(out, r.t);
    for (double v : {r.x, r.y, r.z, r.V, r.gamma, r.chi, r.mu, r.beta}) {
      out += ',';
      append_csv_double(out, v);
    }
    out += ',';
    out += std::to_string(r.action);
    for (double v : {r.reward, r.energy, r.w_x, r.w_y, r.w_z}) {
      out += ',';
      append_csv_double(out, v);
    }
    out += ',';
    out += r.autopilot ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string theta_history_to_csv(const std::vector<ThetaSnapshot>& history) {
  std::string out = "step";
  for (int i = 0; i < kNumWeights; ++i) {
    out += ",theta_" + std::to_string(i);
  }
  out += '\n';
  for (const auto& snap : history) {
    out += std::to_string(snap.step);
    for (int i = 0; i < kNumWeights; ++i) {
      out += ',';
      append_csv_double(out, snap.weights.theta[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace soar
