#pragma once

#include <array>
#include <span>

#include "soar/flight_dynamics.hpp"
#include "soar/rng.hpp"

namespace soar {

// Online Q-learning controller: epsilon-greedy over 9 bank/sideslip
// increments, linear Q approximation over 15 quadratic features of the
// sigmoid-normalized observation (z_dot, gamma_dot, mu, beta), constant
// learning and exploration rates.

inline constexpr int kNumActions = 9;
inline constexpr int kNumFeatures = 15;
inline constexpr int kNumWeights = kNumActions * kNumFeatures;

/// What the controller senses. All other simulator state is hidden from it.
struct Observation {
  double z_dot = 0.0;      // m/s
  double gamma_dot = 0.0;  // rad/s
  double mu = 0.0;         // rad
  double beta = 0.0;       // rad
};

/// One of the 9 increment pairs. index = 3 * i_mu + i_beta with
/// i in {0, 1, 2} standing for {-, 0, +}.
struct Action {
  int index = 4;  // the (0, 0) action

  int mu_sign() const { return index / 3 - 1; }
  int beta_sign() const { return index % 3 - 1; }

  static Action from_signs(int mu_sign, int beta_sign) {
    return {3 * (mu_sign + 1) + (beta_sign + 1)};
  }
};

using FeatureVector = std::array<double, kNumFeatures>;

/// The 135 weights of Q(s, a) = theta . phi(s, a), one 15-entry block per
/// action (phi(s, a) is the state feature vector placed in action a's block).
struct AgentWeights {
  std::array<double, kNumWeights> theta{};

  std::span<const double> block(int action) const {
    return {theta.data() + action * kNumFeatures, kNumFeatures};
  }
  std::span<double> block(int action) {
    return {theta.data() + action * kNumFeatures, kNumFeatures};
  }
};

struct AgentConfig {
  double alpha = 0.001;    // learning rate, per update
  double epsilon = 0.01;   // exploration rate
  double eta = 0.99;       // discount factor
  double delta_mu = 0.003 * M_PI / 180.0;    // rad, bank increment per step
  double delta_beta = 0.003 * M_PI / 180.0;  // rad, sideslip increment per step

  // Sigmoid normalization scales.
  double c_zdot = 1.0;                     // m/s
  double c_gammadot = 0.3;                 // rad/s
  double c_mu = 10.0 * M_PI / 180.0;       // rad
  double c_beta = 15.0 * M_PI / 180.0;     // rad

  double obs_noise_std = 0.0;  // additive Gaussian on z_dot/gamma_dot, off by default
  double vario_tau = 3.0;      // s, low-pass constant of the netto variometer

  // Calibration of the circling prior in the initial weights: preferred bank
  // (degrees) when the vario reads prior_vario (m/s), and a conservatism
  // factor on the bank/sideslip cost bowls. See baseline_theta().
  double prior_bank_deg = 20.0;
  double prior_vario = 0.39;
  double prior_bowl_scale = 4.0;
  // The persistent-wind bound 1/(1 - eta) overestimates the value slope of a
  // vario reading because lift fades with altitude and time; the slope prior
  // starts at this fraction of the bound and online learning re-fits it from
  // flown lift.
  double prior_slope_scale = 0.75;

  // Per-update relaxation of the control-odd weights toward the pilot prior.
  // The dynamics are left-right symmetric, so weights odd in (mu, beta)
  // carry no steady information, but committed one-sided circling starves
  // them of balanced data and lets bootstrap residuals (mainly the fading of
  // lift with altitude, invisible to a position-blind observation) pile up
  // there and bias the straight-flight policy. Everything odd relaxes to
  // zero except the deliberate circling commitment, which relaxes to its
  // calibrated prior value.
  double symmetry_decay = 2e-5;
};

/// Maps each observation component x to 2 / (1 + exp(-x/c)) - 1, an odd,
/// strictly increasing squash onto (-1, 1).
std::array<double, 4> normalize(const Observation& obs, const AgentConfig& cfg);

/// Monomials of the normalized observation up to degree two, fixed order:
/// [1, s1..s4, s1^2, s1 s2, s1 s3, s1 s4, s2^2, s2 s3, s2 s4, s3^2, s3 s4, s4^2].
FeatureVector features(const Observation& obs, const AgentConfig& cfg);

double q_value(const AgentWeights& w, const FeatureVector& phi, Action a);
double q_value(const AgentWeights& w, const Observation& obs, Action a,
               const AgentConfig& cfg);

/// Epsilon-greedy: uniform random action with probability epsilon, otherwise
/// an argmax of Q with ties broken uniformly at random.
Action select_action(const AgentWeights& w, const Observation& obs,
                     double epsilon, Rng& rng, const AgentConfig& cfg);

/// Generic temporal-difference step on a block-structured linear Q:
///   delta = r + eta max_a' theta_a' . phi' - theta_a . phi
///   theta_a += alpha delta phi
/// theta holds n_actions blocks of phi.size() weights. Returns delta.
/// Throws on non-finite delta.
double td_step(std::span<double> theta, std::span<const double> phi_s,
               int action, double reward, std::span<const double> phi_next,
               int n_actions, double alpha, double eta);

/// TD update for the flight agent. Only the chosen action's block changes.
/// Returns the TD error for logging.
double td_update(AgentWeights& w, const Observation& obs, Action a,
                 double reward, const Observation& next_obs,
                 const AgentConfig& cfg);

/// All-action TD update used by the closed loop. The increments' effect on
/// (mu, beta) is exact kinematics and the energy-rate reward does not depend
/// on the current action, so every block can be given its own afterstate
/// target from the one observed transition:
///   s'_a = (z_dot', gamma_dot', clamp(mu + dmu_a), clamp(beta + dbeta_a))
///   delta_a = r + eta max_b Q(s'_a, b) - Q(s, a),   block_a += alpha delta_a phi(s)
/// Sampling noise in r and the bootstrap then hits all blocks as common mode
/// and cancels out of the action ranking, which single-block updates cannot
/// achieve at these increment sizes. Returns the taken action's TD error.
double counterfactual_update(AgentWeights& w, const Observation& obs,
                             Action taken, double reward,
                             const Observation& next_obs,
                             const AgentConfig& cfg,
                             const AircraftConfig& aircraft_cfg);

/// Specific-energy rate z_dot + V V_dot / g, the per-step reward.
double reward(double z_dot, double V, double V_dot, double g = kGravity);

/// Pilot-knowledge initial weights, derived from the polar and the
/// netto-referenced observation: the quasi-static value of a persistent
/// vario offset, bank and sideslip cost bowls, and the committed circling
/// direction (positive bank when the vario reads lift). Identical across
/// blocks, so no action is preferred at start. Q-learning refines all of it
/// online.
AgentWeights baseline_weights(const AgentConfig& cfg,
                              const AircraftConfig& aircraft_cfg);

/// Applies the increment pair to the controls, saturating at the limits.
ControlState apply_action(const ControlState& ctrl, Action a,
                          const AgentConfig& agent_cfg,
                          const AircraftConfig& aircraft_cfg);

}  // namespace soar
