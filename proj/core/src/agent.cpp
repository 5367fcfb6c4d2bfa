#include "soar/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace soar {

namespace {

double sigmoid_norm(double x, double c) { return 2.0 / (1.0 + std::exp(-x / c)) - 1.0; }

}  // namespace

std::array<double, 4> normalize(const Observation& obs, const AgentConfig& cfg) {
  return {sigmoid_norm(obs.z_dot, cfg.c_zdot),
          sigmoid_norm(obs.gamma_dot, cfg.c_gammadot),
          sigmoid_norm(obs.mu, cfg.c_mu), sigmoid_norm(obs.beta, cfg.c_beta)};
}

FeatureVector features(const Observation& obs, const AgentConfig& cfg) {
  const auto s = normalize(obs, cfg);
  FeatureVector phi;
  phi[0] = 1.0;
  phi[1] = s[0];
  phi[2] = s[1];
  phi[3] = s[2];
  phi[4] = s[3];
  int k = 5;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      phi[k++] = s[i] * s[j];
    }
  }
  return phi;
}

double q_value(const AgentWeights& w, const FeatureVector& phi, Action a) {
  const auto block = w.block(a.index);
  double q = 0.0;
  for (int i = 0; i < kNumFeatures; ++i) q += block[i] * phi[i];
  return q;
}

double q_value(const AgentWeights& w, const Observation& obs, Action a,
               const AgentConfig& cfg) {
  return q_value(w, features(obs, cfg), a);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Argmax over action blocks, ties broken uniformly. Draws from rng only
/// when there are at least two maximizers.
int greedy_action(std::span<const double> theta, std::span<const double> phi,
                  int n_actions, Rng& rng) {
  const auto n_feat = phi.size();
  int best = 0;
  double best_q = dot(theta.subspan(0, n_feat), phi);
  int ties = 1;
  // Reservoir-free two-pass tie handling keeps the draw count deterministic
  // in the number of maximizers, not the action order.
  for (int a = 1; a < n_actions; ++a) {
    const double q = dot(theta.subspan(a * n_feat, n_feat), phi);
    if (q > best_q) {
      best_q = q;
      best = a;
      ties = 1;
    } else if (q == best_q) {
      ++ties;
    }
  }
  if (ties == 1) return best;
  int pick = uniform_int(rng, ties);
  for (int a = best; a < n_actions; ++a) {
    const double q = dot(theta.subspan(a * n_feat, n_feat), phi);
    if (q == best_q && pick-- == 0) return a;
  }
  return best;  // unreachable
}

}  // namespace

Action select_action(const AgentWeights& w, const Observation& obs,
                     double epsilon, Rng& rng, const AgentConfig& cfg) {
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return {uniform_int(rng, kNumActions)};
  }
  const auto phi = features(obs, cfg);
  return {greedy_action(std::span<const double>(w.theta), phi, kNumActions, rng)};
}

double td_step(std::span<double> theta, std::span<const double> phi_s,
               int action, double reward, std::span<const double> phi_next,
               int n_actions, double alpha, double eta) {
  const auto n_feat = phi_s.size();
  double max_next = dot(std::span<const double>(theta).subspan(0, n_feat), phi_next);
  for (int a = 1; a < n_actions; ++a) {
    max_next = std::max(
        max_next,
        dot(std::span<const double>(theta).subspan(a * n_feat, n_feat), phi_next));
  }
  const double q_sa =
      dot(std::span<const double>(theta).subspan(action * n_feat, n_feat), phi_s);
  const double delta = reward + eta * max_next - q_sa;
  if (!std::isfinite(delta)) {
    throw std::runtime_error("td_step: non-finite TD error (divergence)");
  }
  auto block = theta.subspan(action * n_feat, n_feat);
  for (std::size_t i = 0; i < n_feat; ++i) block[i] += alpha * delta * phi_s[i];
  return delta;
}

double td_update(AgentWeights& w, const Observation& obs, Action a,
                 double reward, const Observation& next_obs,
                 const AgentConfig& cfg) {
  const auto phi_s = features(obs, cfg);
  const auto phi_next = features(next_obs, cfg);
  return td_step(std::span<double>(w.theta), phi_s, a.index, reward, phi_next,
                 kNumActions, cfg.alpha, cfg.eta);
}

AgentWeights baseline_weights(const AgentConfig& cfg,
                              const AircraftConfig& ac) {
  const double horizon = 1.0 / (1.0 - cfg.eta);
  const double trim = trim_alpha(ac);
  const auto eq = glide_equilibrium(ac, trim);

  // w0, w1: quasi-static value of a persistent netto offset; the channel
  // reads zero on the trim glide and netto = 2 c_zdot atanh(s1) ~ 2 c_zdot s1.
  const double w0 = eq.sink * horizon;
  const double w1 = cfg.prior_slope_scale * 2.0 * cfg.c_zdot * horizon;

  // Cost bowls from the polar: steady banked flight sinks like
  // (cos mu)^(-3/2), i.e. delta_r ~ -|sink| (3/4) mu^2, and sideslip adds
  // cd_beta beta^2 of drag. Small-signal, mu ~ 2 c_mu s3, beta ~ 2 c_beta s4.
  // prior_bowl_scale deepens both as a conservatism margin.
  const double sink_mag = std::abs(eq.sink);
  const double a_mu = -cfg.prior_bowl_scale * sink_mag * 0.75 * 4.0 * cfg.c_mu *
                      cfg.c_mu * horizon;
  const double trim_cl = ac.cl_alpha * (trim - ac.alpha0);
  const double trim_cd = ac.cd0 + ac.induced_k * trim_cl * trim_cl;
  const double a_beta = -cfg.prior_bowl_scale * sink_mag *
                        (ac.cd_beta / trim_cd) * 4.0 * cfg.c_beta * cfg.c_beta *
                        horizon;

  // Committed circling direction: the b s1 s3 + a_mu s3^2 landscape peaks at
  // s3* = b s1 / (2 |a_mu|); calibrated to prior_bank_deg at prior_vario.
  const double s1_at = std::tanh(cfg.prior_vario / (2.0 * cfg.c_zdot));
  const double s3_target =
      std::tanh(cfg.prior_bank_deg * M_PI / 180.0 / (2.0 * cfg.c_mu));
  const double b_circ = 2.0 * std::abs(a_mu) * s3_target / std::max(0.02, s1_at);

  AgentWeights w;
  for (int a = 0; a < kNumActions; ++a) {
    auto block = w.block(a);
    block[0] = w0;
    block[1] = w1;      // s1 (netto vario)
    block[7] = b_circ;  // s1 s3
    block[12] = a_mu;   // s3^2
    block[14] = a_beta; // s4^2
  }
  return w;
}

double counterfactual_update(AgentWeights& w, const Observation& obs,
                             Action taken, double reward,
                             const Observation& next_obs,
                             const AgentConfig& cfg,
                             const AircraftConfig& aircraft_cfg) {
  const auto phi_s = features(obs, cfg);

  // Targets from the pre-update weights, applied synchronously.
  std::array<double, kNumActions> delta;
  for (int a = 0; a < kNumActions; ++a) {
    const Action act{a};
    Observation after = next_obs;
    after.mu = std::clamp(obs.mu + act.mu_sign() * cfg.delta_mu,
                          -aircraft_cfg.mu_max, aircraft_cfg.mu_max);
    after.beta = std::clamp(obs.beta + act.beta_sign() * cfg.delta_beta,
                            -aircraft_cfg.beta_max, aircraft_cfg.beta_max);
    const auto phi_after = features(after, cfg);
    double max_next = q_value(w, phi_after, Action{0});
    for (int b = 1; b < kNumActions; ++b) {
      max_next = std::max(max_next, q_value(w, phi_after, Action{b}));
    }
    delta[a] = reward + cfg.eta * max_next - q_value(w, phi_s, act);
    if (!std::isfinite(delta[a])) {
      throw std::runtime_error("counterfactual_update: non-finite TD error");
    }
  }
  for (int a = 0; a < kNumActions; ++a) {
    auto block = w.block(a);
    for (int i = 0; i < kNumFeatures; ++i) {
      block[i] += cfg.alpha * delta[a] * phi_s[i];
    }
  }

  // Relax the block-averaged control-odd weights toward the pilot prior:
  // s3, s4, s1 s4, s2 s3, s2 s4, s3 s4 toward zero, the circling term s1 s3
  // toward its calibrated value. Only the common mode is shifted; the
  // per-block deviations carry the action ranking and stay untouched.
  if (cfg.symmetry_decay > 0.0) {
    static constexpr int kOddIdx[] = {3, 4, 7, 8, 10, 11, 13};
    const double b_prior = baseline_weights(cfg, aircraft_cfg).block(0)[7];
    for (int i : kOddIdx) {
      double mean = 0.0;
      for (int a = 0; a < kNumActions; ++a) mean += w.block(a)[i];
      mean /= kNumActions;
      const double target = i == 7 ? b_prior : 0.0;
      const double shift = cfg.symmetry_decay * (target - mean);
      for (int a = 0; a < kNumActions; ++a) w.block(a)[i] += shift;
    }
  }
  return delta[taken.index];
}

double reward(double z_dot, double V, double V_dot, double g) {
  return z_dot + V * V_dot / g;
}

ControlState apply_action(const ControlState& ctrl, Action a,
                          const AgentConfig& agent_cfg,
                          const AircraftConfig& aircraft_cfg) {
  ControlState c = ctrl;
  c.mu += a.mu_sign() * agent_cfg.delta_mu;
  c.beta += a.beta_sign() * agent_cfg.delta_beta;
  return clamp_controls(c, aircraft_cfg);
}

}  // namespace soar
