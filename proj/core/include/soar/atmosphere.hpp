#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soar/rng.hpp"

namespace soar {

// Convective-atmosphere model: a constant population of bell-shaped thermal
// updrafts with an altitude-dependent strength law, finite life cycles,
// horizontal drift, downdraft rings, a mass-conserving environmental sink
// outside the thermals, and an Ornstein-Uhlenbeck wind noise process.

/// One thermal: location, strength, geometry scale, drift and life cycle.
struct ThermalParams {
  double x_th = 0.0;      // m, center x at birth
  double y_th = 0.0;      // m, center y at birth
  double w_star = 2.56;   // m/s, average updraft velocity scale
  double z_i = 1401.0;    // m, convective boundary layer thickness
  double v_drift_x = 0.0; // m/s, horizontal drift velocity
  double v_drift_y = 0.0; // m/s
  double t_birth = 0.0;   // s, absolute creation time
  double t_off = 0.0;     // s, latency phase duration
  double t_life = 300.0;  // s, growth/maturity/fade duration
  double xi = 2.0;        // life-cycle shape parameter, > 0

  /// Dead (contributes nothing, eligible for respawn) from this time on.
  double death_time() const { return t_birth + t_off + t_life; }

  /// Center position at time t (rigid drift from the birth location).
  void center_at(double t, double& cx, double& cy) const {
    cx = x_th + v_drift_x * (t - t_birth);
    cy = y_th + v_drift_y * (t - t_birth);
  }
};

struct WindVector {
  double w_x = 0.0;  // m/s, earth frame
  double w_y = 0.0;
  double w_z = 0.0;  // positive up
};

/// Tunables of the atmosphere. Ranges feed the respawn draws.
struct AtmosphereConfig {
  double arena_radius = 550.0;  // m
  int n_thermals = 8;           // constant population size N

  // Respawn parameter ranges (uniform draws).
  double w_star_min = 2.5, w_star_max = 3.5;       // m/s
  double z_i_min = 1100.0, z_i_max = 1700.0;       // m
  double t_off_min = 0.0, t_off_max = 60.0;        // s
  double t_life_min = 500.0, t_life_max = 900.0;   // s
  double xi_min = 1.0, xi_max = 2.5;
  double drift_max = 0.3;  // m/s, per horizontal component

  // Radial geometry: r2 = max(r_min, r_max * (z/z_i)^(1/3)), r1 = core_ratio * r2.
  double r_min = 10.0;      // m
  double r_max = 250.0;     // m
  double core_ratio = 0.5;  // r1 / r2, in (0, 1)
  double k_down = 0.3;      // downdraft ring depth, fraction of w_peak

  // Wind noise: OU process per component.
  double sigma_n = 0.05;  // m/s, stationary standard deviation
  double tau_n = 1.0;    // s, correlation time
};

// ---------------------------------------------------------------------------
// Pointwise model functions.

/// Peak updraft velocity at altitude z: w* (z/z_i)^(1/3) (1 - 1.1 z/z_i).
/// Zero for z <= 0 and for z >= 0.9 z_i.
double w_peak(double z, double w_star, double z_i);

/// Radial profile of the vertical wind, normalized to the peak value.
/// 1 on [0, r1]; cosine rolloff to 0 on (r1, r2); downdraft ring
/// -k_down sin^2(pi (r - r2) / r2) on (r2, 2 r2); 0 beyond 2 r2.
/// Continuous everywhere. Requires 0 < r1 < r2.
double updraft_shape(double r, double r1, double r2, double k_down = 0.3);

/// Thermal radii at altitude z > 0. Returns {r1, r2}.
struct ThermalRadii {
  double r1 = 0.0;  // m, core radius
  double r2 = 0.0;  // m, outer updraft radius (influence ends at 2 r2)
};
ThermalRadii thermal_radii(double z, double z_i, const AtmosphereConfig& cfg);

/// Life-cycle multiplier c(t) in [0, 1]: zero during latency and after death,
/// else the normalized bump tau^xi (1 - tau) peaking at tau = xi / (xi + 1).
double life_cycle_coeff(double t, const ThermalParams& th);

/// Area integral of updraft_shape over the disc r < 2 r2 (closed form),
/// including the negative downdraft ring. Multiplied by the peak vertical
/// wind this gives one thermal's volume flux through the altitude plane.
double shape_disc_integral(double r1, double r2, double k_down);

// ---------------------------------------------------------------------------

/// State of the three-component OU wind noise.
struct NoiseState {
  double n_x = 0.0;  // m/s
  double n_y = 0.0;
  double n_z = 0.0;
};

/// The live atmosphere: exactly N thermals plus the noise process.
/// Mutated only through step(); wind queries between steps are const.
class AtmosphereField {
 public:
  /// Spawns the initial population of N thermals at time t0.
  AtmosphereField(const AtmosphereConfig& cfg, std::uint64_t spawn_seed,
                  std::uint64_t noise_seed, double t0 = 0.0);

  /// Starts from a scripted thermal list (scenario setups); respawns after
  /// scripted thermals die still use the configured random ranges.
  AtmosphereField(const AtmosphereConfig& cfg,
                  std::vector<ThermalParams> initial_thermals,
                  std::uint64_t spawn_seed, std::uint64_t noise_seed);

  /// Wind at a position and time. Includes live thermal updrafts, the
  /// environmental sink (only outside every thermal footprint), and the
  /// current noise sample. Does not advance any state.
  WindVector wind_at(double x, double y, double z, double t) const;

  /// Mass-conservation sink rate at altitude z and time t (<= 0 with the
  /// default geometry). Zero when no thermal is live at this altitude.
  double environmental_sink(double z, double t) const;

  /// Advances the noise process by dt and replaces thermals that are dead
  /// at time t + dt. The population count is invariant.
  void step(double t, double dt);

  const std::vector<ThermalParams>& thermals() const { return thermals_; }
  const NoiseState& noise() const { return noise_; }
  const AtmosphereConfig& config() const { return cfg_; }

  /// JSON snapshot of the full field state (thermals, noise, RNG positions,
  /// configuration). Restoring reproduces subsequent queries bit-exactly.
  std::string to_json() const;
  static AtmosphereField from_json(const std::string& text);

 private:
  AtmosphereField() = default;

  AtmosphereConfig cfg_;
  std::vector<ThermalParams> thermals_;
  NoiseState noise_;
  Rng spawn_rng_;
  Rng noise_rng_;
};

/// Draws a fresh thermal: center uniform in the arena disc, remaining
/// parameters uniform in the configured ranges, born at time t.
ThermalParams spawn_thermal(Rng& rng, const AtmosphereConfig& cfg, double t);

}  // namespace soar
