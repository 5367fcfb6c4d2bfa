#include "soar/atmosphere.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace soar {

double w_peak(double z, double w_star, double z_i) {
  if (z <= 0.0 || z >= 0.9 * z_i) return 0.0;
  const double u = z / z_i;
  return w_star * std::cbrt(u) * (1.0 - 1.1 * u);
}

double updraft_shape(double r, double r1, double r2, double k_down) {
  if (!(0.0 < r1 && r1 < r2)) {
    throw std::invalid_argument("updraft_shape: requires 0 < r1 < r2");
  }
  if (r <= r1) return 1.0;
  if (r < r2) return 0.5 * (1.0 + std::cos(M_PI * (r - r1) / (r2 - r1)));
  if (r < 2.0 * r2) {
    const double s = std::sin(M_PI * (r - r2) / r2);
    return -k_down * s * s;
  }
  return 0.0;
}

ThermalRadii thermal_radii(double z, double z_i, const AtmosphereConfig& cfg) {
  const double r2 = std::max(cfg.r_min, cfg.r_max * std::cbrt(z / z_i));
  return {cfg.core_ratio * r2, r2};
}

double life_cycle_coeff(double t, const ThermalParams& th) {
  const double t_on = th.t_birth + th.t_off;
  if (t < t_on || t >= t_on + th.t_life) return 0.0;
  const double tau = (t - t_on) / th.t_life;
  const double tau_star = th.xi / (th.xi + 1.0);
  const double bump = std::pow(tau, th.xi) * (1.0 - tau);
  const double peak = std::pow(tau_star, th.xi) * (1.0 - tau_star);
  return bump / peak;
}

double shape_disc_integral(double r1, double r2, double k_down) {
  // Plateau: pi r1^2.
  // Cosine band: pi [ (r2^2 - r1^2)/2 - 2 (r2 - r1)^2 / pi^2 ].
  // Downdraft ring r2..2r2 of -k sin^2(pi(r-r2)/r2): -(3/2) pi k r2^2.
  const double w = r2 - r1;
  const double band = M_PI * (0.5 * (r2 * r2 - r1 * r1) - 2.0 * w * w / (M_PI * M_PI));
  return M_PI * r1 * r1 + band - 1.5 * M_PI * k_down * r2 * r2;
}

namespace {

// A thermal adds vertical wind at (z, t) only when both its life-cycle
// coefficient and the altitude law are nonzero.
bool live_at(const ThermalParams& th, double z, double t) {
  if (z <= 0.0 || z >= 0.9 * th.z_i) return false;
  const double t_on = th.t_birth + th.t_off;
  return t >= t_on && t < t_on + th.t_life;
}

}  // namespace

ThermalParams spawn_thermal(Rng& rng, const AtmosphereConfig& cfg, double t) {
  ThermalParams th;
  // Draw order is fixed; changing it would break seed reproducibility.
  const double radius = cfg.arena_radius * std::sqrt(uniform01(rng));
  const double angle = 2.0 * M_PI * uniform01(rng);
  th.x_th = radius * std::cos(angle);
  th.y_th = radius * std::sin(angle);
  th.w_star = uniform(rng, cfg.w_star_min, cfg.w_star_max);
  th.z_i = uniform(rng, cfg.z_i_min, cfg.z_i_max);
  th.v_drift_x = uniform(rng, -cfg.drift_max, cfg.drift_max);
  th.v_drift_y = uniform(rng, -cfg.drift_max, cfg.drift_max);
  th.t_off = uniform(rng, cfg.t_off_min, cfg.t_off_max);
  th.t_life = uniform(rng, cfg.t_life_min, cfg.t_life_max);
  th.xi = uniform(rng, cfg.xi_min, cfg.xi_max);
  th.t_birth = t;
  return th;
}

AtmosphereField::AtmosphereField(const AtmosphereConfig& cfg,
                                 std::uint64_t spawn_seed,
                                 std::uint64_t noise_seed, double t0)
    : cfg_(cfg), spawn_rng_(spawn_seed), noise_rng_(noise_seed) {
  thermals_.reserve(cfg.n_thermals);
  for (int i = 0; i < cfg.n_thermals; ++i) {
    thermals_.push_back(spawn_thermal(spawn_rng_, cfg_, t0));
  }
}

AtmosphereField::AtmosphereField(const AtmosphereConfig& cfg,
                                 std::vector<ThermalParams> initial_thermals,
                                 std::uint64_t spawn_seed,
                                 std::uint64_t noise_seed)
    : cfg_(cfg),
      thermals_(std::move(initial_thermals)),
      spawn_rng_(spawn_seed),
      noise_rng_(noise_seed) {
  cfg_.n_thermals = static_cast<int>(thermals_.size());
}

double AtmosphereField::environmental_sink(double z, double t) const {
  double flux = 0.0;       // m^3/s through the altitude plane, thermals only
  double footprint = 0.0;  // m^2, summed pi (2 r2)^2
  for (const auto& th : thermals_) {
    if (!live_at(th, z, t)) continue;
    const double wp = w_peak(z, th.w_star, th.z_i) * life_cycle_coeff(t, th);
    const auto radii = thermal_radii(z, th.z_i, cfg_);
    flux += wp * shape_disc_integral(radii.r1, radii.r2, cfg_.k_down);
    footprint += M_PI * 4.0 * radii.r2 * radii.r2;
  }
  if (flux == 0.0) return 0.0;
  const double arena_area = M_PI * cfg_.arena_radius * cfg_.arena_radius;
  if (footprint >= arena_area) return 0.0;  // degenerate, no sink region left
  return -flux / (arena_area - footprint);
}

WindVector AtmosphereField::wind_at(double x, double y, double z,
                                    double t) const {
  double w_thermal = 0.0;
  bool inside_footprint = false;
  for (const auto& th : thermals_) {
    if (!live_at(th, z, t)) continue;
    double cx, cy;
    th.center_at(t, cx, cy);
    const auto radii = thermal_radii(z, th.z_i, cfg_);
    const double r = std::hypot(x - cx, y - cy);
    if (r >= 2.0 * radii.r2) continue;
    inside_footprint = true;
    const double wp = w_peak(z, th.w_star, th.z_i) * life_cycle_coeff(t, th);
    w_thermal += wp * updraft_shape(r, radii.r1, radii.r2, cfg_.k_down);
  }
  const double sink = inside_footprint ? 0.0 : environmental_sink(z, t);
  return {noise_.n_x, noise_.n_y, w_thermal + sink + noise_.n_z};
}

void AtmosphereField::step(double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("AtmosphereField::step: dt must be > 0");

  // Exact OU update: n' = n e^(-dt/tau) + sigma sqrt(1 - e^(-2 dt/tau)) xi.
  if (cfg_.sigma_n > 0.0) {
    const double decay = std::exp(-dt / cfg_.tau_n);
    const double kick = cfg_.sigma_n * std::sqrt(1.0 - decay * decay);
    noise_.n_x = noise_.n_x * decay + kick * standard_normal(noise_rng_);
    noise_.n_y = noise_.n_y * decay + kick * standard_normal(noise_rng_);
    noise_.n_z = noise_.n_z * decay + kick * standard_normal(noise_rng_);
  }

  // A thermal is replaced when it dies, and also once drift has carried its
  // center out of the arena: the population is a constant N of thermals in
  // the flight area.
  const double t_new = t + dt;
  for (auto& th : thermals_) {
    double cx, cy;
    th.center_at(t_new, cx, cy);
    if (t_new >= th.death_time() || std::hypot(cx, cy) > cfg_.arena_radius) {
      th = spawn_thermal(spawn_rng_, cfg_, t_new);
    }
  }
}

namespace {

nlohmann::json config_to_json(const AtmosphereConfig& c) {
  return {{"arena_radius", c.arena_radius}, {"n_thermals", c.n_thermals},
          {"w_star_min", c.w_star_min},     {"w_star_max", c.w_star_max},
          {"z_i_min", c.z_i_min},           {"z_i_max", c.z_i_max},
          {"t_off_min", c.t_off_min},       {"t_off_max", c.t_off_max},
          {"t_life_min", c.t_life_min},     {"t_life_max", c.t_life_max},
          {"xi_min", c.xi_min},             {"xi_max", c.xi_max},
          {"drift_max", c.drift_max},       {"r_min", c.r_min},
          {"r_max", c.r_max},               {"core_ratio", c.core_ratio},
          {"k_down", c.k_down},             {"sigma_n", c.sigma_n},
          {"tau_n", c.tau_n}};
}

AtmosphereConfig config_from_json(const nlohmann::json& j) {
  AtmosphereConfig c;
  c.arena_radius = j.at("arena_radius");
  c.n_thermals = j.at("n_thermals");
  c.w_star_min = j.at("w_star_min");
  c.w_star_max = j.at("w_star_max");
  c.z_i_min = j.at("z_i_min");
  c.z_i_max = j.at("z_i_max");
  c.t_off_min = j.at("t_off_min");
  c.t_off_max = j.at("t_off_max");
  c.t_life_min = j.at("t_life_min");
  c.t_life_max = j.at("t_life_max");
  c.xi_min = j.at("xi_min");
  c.xi_max = j.at("xi_max");
  c.drift_max = j.at("drift_max");
  c.r_min = j.at("r_min");
  c.r_max = j.at("r_max");
  c.core_ratio = j.at("core_ratio");
  c.k_down = j.at("k_down");
  c.sigma_n = j.at("sigma_n");
  c.tau_n = j.at("tau_n");
  return c;
}

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw std::runtime_error("AtmosphereField: bad RNG state string");
  return rng;
}

}  // namespace

std::string AtmosphereField::to_json() const {
  nlohmann::json j;
  j["config"] = config_to_json(cfg_);
  j["thermals"] = nlohmann::json::array();
  for (const auto& th : thermals_) {
    j["thermals"].push_back({{"x_th", th.x_th},
                             {"y_th", th.y_th},
                             {"w_star", th.w_star},
                             {"z_i", th.z_i},
                             {"v_drift_x", th.v_drift_x},
                             {"v_drift_y", th.v_drift_y},
                             {"t_birth", th.t_birth},
                             {"t_off", th.t_off},
                             {"t_life", th.t_life},
                             {"xi", th.xi}});
  }
  j["noise"] = {{"n_x", noise_.n_x}, {"n_y", noise_.n_y}, {"n_z", noise_.n_z}};
  j["spawn_rng"] = rng_to_string(spawn_rng_);
  j["noise_rng"] = rng_to_string(noise_rng_);
  return j.dump(2);
}

AtmosphereField AtmosphereField::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  AtmosphereField f;
  f.cfg_ = config_from_json(j.at("config"));
  for (const auto& jt : j.at("thermals")) {
    ThermalParams th;
    th.x_th = jt.at("x_th");
    th.y_th = jt.at("y_th");
    th.w_star = jt.at("w_star");
    th.z_i = jt.at("z_i");
    th.v_drift_x = jt.at("v_drift_x");
    th.v_drift_y = jt.at("v_drift_y");
    th.t_birth = jt.at("t_birth");
    th.t_off = jt.at("t_off");
    th.t_life = jt.at("t_life");
    th.xi = jt.at("xi");
    f.thermals_.push_back(th);
  }
  f.noise_.n_x = j.at("noise").at("n_x");
  f.noise_.n_y = j.at("noise").at("n_y");
  f.noise_.n_z = j.at("noise").at("n_z");
  f.spawn_rng_ = rng_from_string(j.at("spawn_rng"));
  f.noise_rng_ = rng_from_string(j.at("noise_rng"));
  return f;
}

}  // namespace soar
