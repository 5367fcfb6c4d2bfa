#include "soar/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace soar {

namespace {

constexpr double kDeg = M_PI / 180.0;  // stored radians per configured degree

struct KeyEntry {
  const char* name;
  enum Kind { Real, Int, Bool } kind;
  double min = 0.0, max = 0.0;  // inclusive bounds (Real/Int)
  double scale = 1.0;           // stored = parsed * scale
  double& (*real_ref)(RunConfig&) = nullptr;
  int& (*int_ref)(RunConfig&) = nullptr;
  bool& (*bool_ref)(RunConfig&) = nullptr;
};

KeyEntry real_key(const char* name, double min, double max,
                  double& (*ref)(RunConfig&), double scale = 1.0) {
  KeyEntry e;
  e.name = name;
  e.kind = KeyEntry::Real;
  e.min = min;
  e.max = max;
  e.scale = scale;
  e.real_ref = ref;
  return e;
}

KeyEntry int_key(const char* name, int min, int max, int& (*ref)(RunConfig&)) {
  KeyEntry e;
  e.name = name;
  e.kind = KeyEntry::Int;
  e.min = min;
  e.max = max;
  e.int_ref = ref;
  return e;
}

KeyEntry bool_key(const char* name, bool& (*ref)(RunConfig&)) {
  KeyEntry e;
  e.name = name;
  e.kind = KeyEntry::Bool;
  e.bool_ref = ref;
  return e;
}

#define REAL_REF(field) +[](RunConfig& c) -> double& { return c.field; }
#define INT_REF(field) +[](RunConfig& c) -> int& { return c.field; }
#define BOOL_REF(field) +[](RunConfig& c) -> bool& { return c.field; }

const std::vector<KeyEntry>& registry() {
  static const std::vector<KeyEntry> keys = {
      // Atmosphere.
      real_key("arena_radius", 1.0, 1e5, REAL_REF(atmosphere.arena_radius)),
      int_key("n_thermals", 0, 1000, INT_REF(atmosphere.n_thermals)),
      real_key("w_star_min", 0.0, 20.0, REAL_REF(atmosphere.w_star_min)),
      real_key("w_star_max", 0.0, 20.0, REAL_REF(atmosphere.w_star_max)),
      real_key("z_i_min", 1.0, 1e4, REAL_REF(atmosphere.z_i_min)),
      real_key("z_i_max", 1.0, 1e4, REAL_REF(atmosphere.z_i_max)),
      real_key("t_off_min", 0.0, 1e4, REAL_REF(atmosphere.t_off_min)),
      real_key("t_off_max", 0.0, 1e4, REAL_REF(atmosphere.t_off_max)),
      real_key("t_life_min", 1.0, 1e5, REAL_REF(atmosphere.t_life_min)),
      real_key("t_life_max", 1.0, 1e5, REAL_REF(atmosphere.t_life_max)),
      real_key("xi_min", 0.1, 20.0, REAL_REF(atmosphere.xi_min)),
      real_key("xi_max", 0.1, 20.0, REAL_REF(atmosphere.xi_max)),
      real_key("drift_max", 0.0, 10.0, REAL_REF(atmosphere.drift_max)),
      real_key("r_min", 1.0, 1000.0, REAL_REF(atmosphere.r_min)),
      real_key("r_max", 1.0, 2000.0, REAL_REF(atmosphere.r_max)),
      // core_ratio/k_down ranges keep the net thermal flux positive, so the
      // environmental sink stays a sink.
      real_key("core_ratio", 0.4, 0.9, REAL_REF(atmosphere.core_ratio)),
      real_key("k_down", 0.0, 0.3, REAL_REF(atmosphere.k_down)),
      real_key("sigma_n", 0.0, 10.0, REAL_REF(atmosphere.sigma_n)),
      real_key("tau_n", 0.01, 100.0, REAL_REF(atmosphere.tau_n)),
      // Aircraft.
      real_key("mass", 0.1, 1e4, REAL_REF(aircraft.mass)),
      real_key("wing_area", 0.01, 100.0, REAL_REF(aircraft.wing_area)),
      real_key("rho_air", 0.01, 10.0, REAL_REF(aircraft.rho_air)),
      real_key("cl_alpha", 0.1, 20.0, REAL_REF(aircraft.cl_alpha)),
      real_key("alpha0_deg", -10.0, 10.0, REAL_REF(angles.alpha0)),
      real_key("cd0", 1e-4, 1.0, REAL_REF(aircraft.cd0)),
      real_key("induced_k", 1e-4, 1.0, REAL_REF(aircraft.induced_k)),
      real_key("cd_beta", 0.0, 10.0, REAL_REF(aircraft.cd_beta)),
      real_key("cy_beta", -10.0, 10.0, REAL_REF(aircraft.cy_beta)),
      real_key("v_min", 0.1, 100.0, REAL_REF(aircraft.v_min)),
      real_key("beta_max_deg", 1.0, 80.0, REAL_REF(angles.beta_max)),
      real_key("mu_max_deg", 1.0, 80.0, REAL_REF(angles.mu_max)),
      // Agent.
      real_key("alpha", 1e-9, 1.0, REAL_REF(agent.alpha)),
      real_key("epsilon", 0.0, 1.0, REAL_REF(agent.epsilon)),
      real_key("eta", 0.0, 0.9999999, REAL_REF(agent.eta)),
      real_key("delta_mu_deg", 1e-6, 10.0, REAL_REF(angles.delta_mu)),
      real_key("delta_beta_deg", 1e-6, 10.0, REAL_REF(angles.delta_beta)),
      real_key("c_zdot", 1e-3, 100.0, REAL_REF(agent.c_zdot)),
      real_key("c_gammadot", 1e-3, 100.0, REAL_REF(agent.c_gammadot)),
      real_key("c_mu_deg", 0.1, 180.0, REAL_REF(angles.c_mu)),
      real_key("c_beta_deg", 0.1, 180.0, REAL_REF(angles.c_beta)),
      real_key("obs_noise_std", 0.0, 10.0, REAL_REF(agent.obs_noise_std)),
      real_key("vario_tau", 0.0, 60.0, REAL_REF(agent.vario_tau)),
      real_key("prior_bank_deg", 0.0, 45.0, REAL_REF(agent.prior_bank_deg)),
      real_key("prior_vario", 0.05, 10.0, REAL_REF(agent.prior_vario)),
      real_key("prior_bowl_scale", 0.1, 100.0, REAL_REF(agent.prior_bowl_scale)),
      real_key("prior_slope_scale", 0.1, 2.0, REAL_REF(agent.prior_slope_scale)),
      real_key("symmetry_decay", 0.0, 0.1, REAL_REF(agent.symmetry_decay)),
      // Simulation.
      real_key("dt", 1e-5, 1.0, REAL_REF(sim.dt)),
      real_key("duration", 0.001, 1e6, REAL_REF(sim.duration)),
      int_key("decimation", 1, 1000000, INT_REF(sim.decimation)),
      real_key("theta_snapshot_period", 0.001, 1e4,
               REAL_REF(sim.theta_snapshot_period)),
      real_key("init_z", 1.0, 1e4, REAL_REF(sim.init_z)),
      real_key("init_v", 0.1, 100.0, REAL_REF(sim.init_V)),
      bool_key("scale_rates_with_dt", BOOL_REF(sim.scale_rates_with_dt)),
      real_key("autopilot_reentry", 0.1, 1.0, REAL_REF(sim.autopilot_reentry)),
      // Scenario scripting.
      real_key("scripted_w_star", 0.0, 20.0, REAL_REF(script.w_star)),
      real_key("scripted_z_i", 1.0, 1e4, REAL_REF(script.z_i)),
      real_key("scripted_xi", 0.1, 20.0, REAL_REF(script.xi)),
      real_key("birth_lead_distance", 0.0, 1e4, REAL_REF(script.birth_lead)),
      real_key("birth_t_off", 0.0, 1e4, REAL_REF(script.birth_t_off)),
      real_key("birth_t_life", 1.0, 1e5, REAL_REF(script.birth_t_life)),
      real_key("death_time", 1.0, 1e5, REAL_REF(script.death_time)),
      // Convergence study.
      int_key("rollouts", 2, 10000, INT_REF(converge.rollouts)),
      real_key("conv_duration", 1.0, 1e6, REAL_REF(converge.duration)),
      real_key("opt_duration", 1.0, 1e6, REAL_REF(converge.opt_duration)),
      real_key("opt_settle_time", 0.0, 1e6, REAL_REF(converge.opt_settle)),
      int_key("opt_runs", 1, 1000, INT_REF(converge.opt_runs)),
      real_key("adapt_threshold", 0.001, 0.999, REAL_REF(converge.adapt_threshold)),
  };
  return keys;
}

#undef REAL_REF
#undef INT_REF
#undef BOOL_REF

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_real(const std::string& text, const std::string& origin, int line,
                  const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    fail(origin, line, "value '" + text + "' for key '" + key + "' is not a number");
  }
  return v;
}

void cross_check(const RunConfig& c, const std::string& origin) {
  const auto check = [&](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(origin + ": " + msg);
  };
  const auto& a = c.atmosphere;
  check(a.w_star_min <= a.w_star_max, "w_star_min exceeds w_star_max");
  check(a.z_i_min <= a.z_i_max, "z_i_min exceeds z_i_max");
  check(a.t_off_min <= a.t_off_max, "t_off_min exceeds t_off_max");
  check(a.t_life_min <= a.t_life_max, "t_life_min exceeds t_life_max");
  check(a.xi_min <= a.xi_max, "xi_min exceeds xi_max");
  check(a.r_min <= a.r_max, "r_min exceeds r_max");
  check(c.aircraft.v_min < c.sim.init_V, "v_min must be below init_v");
  check(c.converge.opt_settle < c.converge.opt_duration,
        "opt_settle_time must be below opt_duration");
}

}  // namespace

void resolve_angles(RunConfig& cfg) {
  cfg.aircraft.alpha0 = cfg.angles.alpha0 * kDeg;
  cfg.aircraft.beta_max = cfg.angles.beta_max * kDeg;
  cfg.aircraft.mu_max = cfg.angles.mu_max * kDeg;
  cfg.agent.delta_mu = cfg.angles.delta_mu * kDeg;
  cfg.agent.delta_beta = cfg.angles.delta_beta * kDeg;
  cfg.agent.c_mu = cfg.angles.c_mu * kDeg;
  cfg.agent.c_beta = cfg.angles.c_beta * kDeg;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "missing key before '='");
    if (value.empty()) fail(origin, line_no, "missing value for key '" + key + "'");

    const KeyEntry* entry = nullptr;
    for (const auto& e : registry()) {
      if (key == e.name) {
        entry = &e;
        break;
      }
    }
    if (!entry) fail(origin, line_no, "unknown key '" + key + "'");

    switch (entry->kind) {
      case KeyEntry::Real: {
        const double v = parse_real(value, origin, line_no, key);
        if (v < entry->min || v > entry->max) {
          std::ostringstream os;
          os << "key '" << key << "' = " << v << " out of range [" << entry->min
             << ", " << entry->max << "]";
          fail(origin, line_no, os.str());
        }
        entry->real_ref(cfg) = v * entry->scale;
        break;
      }
      case KeyEntry::Int: {
        const double v = parse_real(value, origin, line_no, key);
        if (v != std::floor(v)) {
          fail(origin, line_no, "key '" + key + "' requires an integer");
        }
        if (v < entry->min || v > entry->max) {
          std::ostringstream os;
          os << "key '" << key << "' = " << v << " out of range [" << entry->min
             << ", " << entry->max << "]";
          fail(origin, line_no, os.str());
        }
        entry->int_ref(cfg) = static_cast<int>(v);
        break;
      }
      case KeyEntry::Bool: {
        if (value == "true" || value == "1") {
          entry->bool_ref(cfg) = true;
        } else if (value == "false" || value == "0") {
          entry->bool_ref(cfg) = false;
        } else {
          fail(origin, line_no,
               "key '" + key + "' requires true/false, got '" + value + "'");
        }
        break;
      }
    }
  }
  resolve_angles(cfg);
  cross_check(cfg, origin);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> items;
  items.reserve(registry().size());
  char buf[64];
  RunConfig& c = const_cast<RunConfig&>(cfg);  // registry refs are non-mutating here
  for (const auto& e : registry()) {
    switch (e.kind) {
      case KeyEntry::Real:
        std::snprintf(buf, sizeof buf, "%.17g", e.real_ref(c) / e.scale);
        items.emplace_back(e.name, buf);
        break;
      case KeyEntry::Int:
        std::snprintf(buf, sizeof buf, "%d", e.int_ref(c));
        items.emplace_back(e.name, buf);
        break;
      case KeyEntry::Bool:
        items.emplace_back(e.name, e.bool_ref(c) ? "true" : "false");
        break;
    }
  }
  return items;
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, value] : config_items(cfg)) {
    os << key << " = " << value << "\n";
  }
  return os.str();
}

}  // namespace soar
