#include "soar/flight_dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace soar {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);  // (-pi, pi], remainder returns [-pi, pi]
  if (a <= -M_PI) a = M_PI;
  return a;
}

AeroForces aero_forces(const AircraftState& state, const ControlState& ctrl,
                       const AircraftConfig& cfg) {
  if (state.V < cfg.v_min - 1e-9) {
    throw StallError("aero_forces: V below stall guard");
  }
  const double q = 0.5 * cfg.rho_air * state.V * state.V * cfg.wing_area;
  const double cl = cfg.cl_alpha * (ctrl.alpha - cfg.alpha0);
  const double cd =
      cfg.cd0 + cfg.induced_k * cl * cl + cfg.cd_beta * ctrl.beta * ctrl.beta;
  return {q * cl, q * cd, q * cfg.cy_beta * ctrl.beta};
}

StateDerivative state_derivative(const AircraftState& state,
                                 const ControlState& ctrl,
                                 const WindVector& wind,
                                 const AircraftConfig& cfg) {
  const double cos_gamma = std::cos(state.gamma);
  if (cos_gamma < 1e-6) {
    throw SingularityError("state_derivative: cos(gamma) below 1e-6");
  }
  const auto f = aero_forces(state, ctrl, cfg);
  const double sin_gamma = std::sin(state.gamma);
  const double m = cfg.mass;
  const double V = state.V;

  StateDerivative d;
  d.x_dot = V * std::cos(state.chi) * cos_gamma + wind.w_x;
  d.y_dot = V * std::sin(state.chi) * cos_gamma + wind.w_y;
  d.z_dot = V * sin_gamma + wind.w_z;
  d.V_dot = -f.drag / m - kGravity * sin_gamma;
  d.gamma_dot = (f.lift * std::cos(ctrl.mu) + f.lateral * std::sin(ctrl.mu)) /
                    (m * V) -
                (kGravity / V) * cos_gamma;
  d.chi_dot = (f.lift * std::sin(ctrl.mu) - f.lateral * std::cos(ctrl.mu)) /
              (m * V * cos_gamma);
  return d;
}

namespace {

AircraftState advance(const AircraftState& s, const StateDerivative& d,
                      double h, double v_min) {
  AircraftState r = s;
  r.x += h * d.x_dot;
  r.y += h * d.y_dot;
  r.z += h * d.z_dot;
  r.V = std::max(v_min, s.V + h * d.V_dot);  // stage guard
  r.gamma += h * d.gamma_dot;
  r.chi += h * d.chi_dot;
  return r;
}

}  // namespace

StepResult integrate_step(const AircraftState& state, const ControlState& ctrl,
                          const WindFn& wind, double t, double dt,
                          const AircraftConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_step: dt must be > 0");

  const auto deriv_at = [&](const AircraftState& s, double ts) {
    return state_derivative(s, ctrl, wind(s.x, s.y, s.z, ts), cfg);
  };

  const auto k1 = deriv_at(state, t);
  const auto k2 = deriv_at(advance(state, k1, 0.5 * dt, cfg.v_min), t + 0.5 * dt);
  const auto k3 = deriv_at(advance(state, k2, 0.5 * dt, cfg.v_min), t + 0.5 * dt);
  const auto k4 = deriv_at(advance(state, k3, dt, cfg.v_min), t + dt);

  const auto blend = [](double a, double b, double c, double d) {
    return (a + 2.0 * b + 2.0 * c + d) / 6.0;
  };

  StepResult out;
  out.state.x = state.x + dt * blend(k1.x_dot, k2.x_dot, k3.x_dot, k4.x_dot);
  out.state.y = state.y + dt * blend(k1.y_dot, k2.y_dot, k3.y_dot, k4.y_dot);
  out.state.z = state.z + dt * blend(k1.z_dot, k2.z_dot, k3.z_dot, k4.z_dot);
  out.state.V = state.V + dt * blend(k1.V_dot, k2.V_dot, k3.V_dot, k4.V_dot);
  out.state.gamma =
      state.gamma + dt * blend(k1.gamma_dot, k2.gamma_dot, k3.gamma_dot, k4.gamma_dot);
  out.state.chi = wrap_angle(
      state.chi + dt * blend(k1.chi_dot, k2.chi_dot, k3.chi_dot, k4.chi_dot));

  if (out.state.V < cfg.v_min) {
    out.state.V = cfg.v_min;
    out.stalled = true;
  }
  return out;
}

double total_energy(const AircraftState& state) {
  return state.z + state.V * state.V / (2.0 * kGravity);
}

ControlState clamp_controls(const ControlState& ctrl, const AircraftConfig& cfg) {
  ControlState c = ctrl;
  c.beta = std::clamp(c.beta, -cfg.beta_max, cfg.beta_max);
  c.mu = std::clamp(c.mu, -cfg.mu_max, cfg.mu_max);
  return c;
}

double trim_alpha(const AircraftConfig& cfg) {
  const double cl_best = std::sqrt(cfg.cd0 / cfg.induced_k);
  return cfg.alpha0 + cl_best / cfg.cl_alpha;
}

GlideEquilibrium glide_equilibrium(const AircraftConfig& cfg, double alpha) {
  // V_dot = 0 and gamma_dot = 0 with beta = mu = 0 give
  //   tan(gamma) = -CD / CL,   L = m g cos(gamma).
  const double cl = cfg.cl_alpha * (alpha - cfg.alpha0);
  const double cd = cfg.cd0 + cfg.induced_k * cl * cl;
  GlideEquilibrium eq;
  eq.gamma = std::atan(-cd / cl);
  eq.V = std::sqrt(2.0 * cfg.mass * kGravity * std::cos(eq.gamma) /
                   (cfg.rho_air * cfg.wing_area * cl));
  eq.sink = eq.V * std::sin(eq.gamma);
  return eq;
}

}  // namespace soar
