#pragma once

#include <functional>
#include <stdexcept>

#include "soar/atmosphere.hpp"

namespace soar {

// Point-mass glider in the earth frame. Velocity, climb angle and course are
// air-relative; wind enters the position rates additively (quasi-static
// coupling, wind-acceleration terms neglected).

inline constexpr double kGravity = 9.81;  // m/s^2

/// Kinematic/dynamic state (x, y, z, V, gamma, chi).
struct AircraftState {
  double x = 0.0;      // m, earth frame
  double y = 0.0;      // m
  double z = 0.0;      // m, altitude, positive up
  double V = 0.0;      // m/s, air-relative speed
  double gamma = 0.0;  // rad, angle of climb, |gamma| < pi/2
  double chi = 0.0;    // rad, course angle, wrapped to (-pi, pi]
};

/// Aerodynamic control angles.
struct ControlState {
  double alpha = 0.0;  // rad, angle of attack (held at trim)
  double beta = 0.0;   // rad, sideslip, |beta| <= beta_max
  double mu = 0.0;     // rad, bank, |mu| <= mu_max
};

struct AeroForces {
  double lift = 0.0;     // N
  double drag = 0.0;     // N, >= 0
  double lateral = 0.0;  // N
};

/// Airframe and polar coefficients. Defaults describe a ~5 kg glider.
struct AircraftConfig {
  double mass = 5.0;         // kg
  double wing_area = 0.9;    // m^2
  double rho_air = 1.225;    // kg/m^3
  double cl_alpha = 5.7;     // /rad, lift-curve slope
  double alpha0 = -2.0 * M_PI / 180.0;  // rad, zero-lift angle of attack
  double cd0 = 0.015;        // parasitic drag
  double induced_k = 0.025;  // induced drag factor, CD = cd0 + k CL^2 + cd_beta beta^2
  double cd_beta = 0.4;      // /rad^2, sideslip drag
  double cy_beta = -0.3;     // /rad, side-force slope
  double v_min = 8.0;        // m/s, stall guard
  double beta_max = 45.0 * M_PI / 180.0;  // rad
  double mu_max = 25.0 * M_PI / 180.0;    // rad
};

struct StallError : std::domain_error {
  using std::domain_error::domain_error;
};
struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Quadratic-polar forces at the current state and controls.
/// Throws StallError if V is below the stall guard.
AeroForces aero_forces(const AircraftState& state, const ControlState& ctrl,
                       const AircraftConfig& cfg);

/// Time derivative of the six state components.
struct StateDerivative {
  double x_dot = 0.0;      // m/s
  double y_dot = 0.0;      // m/s
  double z_dot = 0.0;      // m/s
  double V_dot = 0.0;      // m/s^2
  double gamma_dot = 0.0;  // rad/s
  double chi_dot = 0.0;    // rad/s
};

/// Equations of motion. Throws SingularityError when cos(gamma) < 1e-6.
StateDerivative state_derivative(const AircraftState& state,
                                 const ControlState& ctrl,
                                 const WindVector& wind,
                                 const AircraftConfig& cfg);

/// Wind sampled at a position and time; stage positions of the integrator
/// re-query it.
using WindFn = std::function<WindVector(double x, double y, double z, double t)>;

struct StepResult {
  AircraftState state;
  bool stalled = false;  // V clamped at v_min during this step
};

/// One classical RK4 step of length dt. Wraps chi to (-pi, pi] and clamps V
/// at the stall guard (flagging the clamp). Requires dt > 0.
StepResult integrate_step(const AircraftState& state, const ControlState& ctrl,
                          const WindFn& wind, double t, double dt,
                          const AircraftConfig& cfg);

/// Specific total energy z + V^2 / (2g), in meters.
double total_energy(const AircraftState& state);

/// Saturates beta and mu to their limits; alpha passes through.
ControlState clamp_controls(const ControlState& ctrl, const AircraftConfig& cfg);

/// Angle of attack of best glide: CL* = sqrt(cd0 / k) on the quadratic polar.
double trim_alpha(const AircraftConfig& cfg);

/// Algebraic steady-glide solution (V_dot = gamma_dot = 0, beta = mu = 0,
/// still air) at the given angle of attack.
struct GlideEquilibrium {
  double V = 0.0;      // m/s
  double gamma = 0.0;  // rad (negative: descending)
  double sink = 0.0;   // m/s, V sin(gamma)
};
GlideEquilibrium glide_equilibrium(const AircraftConfig& cfg, double alpha);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace soar
