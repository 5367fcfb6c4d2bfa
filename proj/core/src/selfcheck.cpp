#include "soar/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "soar/harness.hpp"

namespace soar {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Quadrature of w_z over the arena disc at altitude z against the positive
/// flux of a single centered thermal. Midpoint rule in polar coordinates.
CheckResult mass_conservation_check(const RunConfig& cfg, double z_frac) {
  AtmosphereConfig atm = cfg.atmosphere;
  atm.sigma_n = 0.0;
  atm.n_thermals = 1;

  ThermalParams th;
  th.w_star = cfg.script.w_star;
  th.z_i = cfg.script.z_i;
  th.xi = 2.0;
  th.t_off = 0.0;
  th.t_life = 1000.0;
  AtmosphereField field(atm, {th}, 1, 2);

  const double t = 0.5 * th.t_life;  // some nonzero life-cycle coefficient
  const double z = z_frac * th.z_i;
  const double R = atm.arena_radius;

  const int nr = 20000, ntheta = 32;
  double integral = 0.0, positive_flux = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * R / nr;
    double ring = 0.0, ring_pos = 0.0;
    for (int j = 0; j < ntheta; ++j) {
      const double a = (j + 0.5) * 2.0 * M_PI / ntheta;
      const double wz = field.wind_at(r * std::cos(a), r * std::sin(a), z, t).w_z;
      ring += wz;
      ring_pos += std::max(wz, 0.0);
    }
    const double weight = r * (R / nr) * (2.0 * M_PI / ntheta);
    integral += ring * weight;
    positive_flux += ring_pos * weight;
  }

  CheckResult res;
  res.name = "mass-conservation z/z_i=" + fmt(z_frac);
  if (positive_flux <= 0.0) {
    res.passed = false;
    res.detail = "no positive flux at this altitude";
    return res;
  }
  const double rel = std::abs(integral) / positive_flux;
  res.passed = rel < 0.01;
  res.detail = "net/positive flux = " + fmt(rel) + " (limit 0.01)";
  return res;
}

CheckResult updraft_law_check(const RunConfig& cfg) {
  const double w_star = cfg.script.w_star;
  const double z_i = cfg.script.z_i;
  const int n = 10000;
  double best_z = 0.0, best_w = -1.0;
  for (int i = 1; i < n; ++i) {
    const double z = z_i * static_cast<double>(i) / n;
    const double w = w_peak(z, w_star, z_i);
    if (w > best_w) {
      best_w = w;
      best_z = z;
    }
  }
  const double frac = best_z / z_i;
  const bool at_max = std::abs(frac - 1.0 / 4.4) < 1e-3;
  const bool zero_above = w_peak(0.91 * z_i, w_star, z_i) == 0.0 &&
                          w_peak(0.95 * z_i, w_star, z_i) == 0.0;
  CheckResult res;
  res.name = "updraft-altitude-law";
  res.passed = at_max && zero_above;
  res.detail = "argmax z/z_i = " + fmt(frac) + " (expect 0.2273), zero above 0.9 z_i: " +
               (zero_above ? "yes" : "no");
  return res;
}

CheckResult equilibrium_check(const RunConfig& cfg) {
  const auto eq = glide_equilibrium(cfg.aircraft, trim_alpha(cfg.aircraft));

  AircraftState state;
  state.z = 2000.0;  // enough altitude to ride out the transient
  state.V = cfg.sim.init_V;
  ControlState ctrl;
  ctrl.alpha = trim_alpha(cfg.aircraft);
  const auto still = [](double, double, double, double) { return WindVector{}; };

  const double dt = 0.001;
  double v_acc = 0.0, gamma_acc = 0.0;
  long count = 0;
  const long n_steps = 150000, tail = 20000;
  for (long k = 0; k < n_steps; ++k) {
    state = integrate_step(state, ctrl, still, k * dt, dt, cfg.aircraft).state;
    if (k >= n_steps - tail) {
      v_acc += state.V;
      gamma_acc += state.gamma;
      ++count;
    }
  }
  const double v_mean = v_acc / count;
  const double gamma_mean = gamma_acc / count;
  const double v_err = std::abs(v_mean - eq.V) / eq.V;
  const double gamma_err = std::abs(gamma_mean - eq.gamma) / std::abs(eq.gamma);

  CheckResult res;
  res.name = "steady-glide-equilibrium";
  res.passed = v_err < 0.02 && gamma_err < 0.02;
  res.detail = "V " + fmt(v_mean) + " vs " + fmt(eq.V) + ", gamma " + fmt(gamma_mean) +
               " vs " + fmt(eq.gamma) + " (2% limits)";
  return res;
}

CheckResult energy_closure_check(const RunConfig& cfg) {
  RunConfig run_cfg = cfg;
  run_cfg.sim.duration = 50.0;
  const Scenario sc = make_scenario(ScenarioKind::ThermalBirth, run_cfg);
  const auto res = run_episode(sc, run_cfg, 12345);
  const double diff = res.summary.energy_end - res.summary.energy_start;
  const double rel = std::abs(res.summary.sum_reward_dt - diff) /
                     std::max(1.0, std::abs(diff));
  CheckResult out;
  out.name = "reward-energy-closure";
  out.passed = rel < 1e-3;
  out.detail = "relative mismatch " + fmt(rel) + " (limit 1e-3)";
  return out;
}

}  // namespace

std::vector<CheckResult> run_selfchecks(const RunConfig& cfg) {
  std::vector<CheckResult> checks;
  for (double frac : {0.2, 0.4, 0.6}) {
    checks.push_back(mass_conservation_check(cfg, frac));
  }
  checks.push_back(updraft_law_check(cfg));
  checks.push_back(equilibrium_check(cfg));
  checks.push_back(energy_closure_check(cfg));
  return checks;
}

}  // namespace soar
