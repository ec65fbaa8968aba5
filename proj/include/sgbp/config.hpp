#pragma once

// Plain-text run configuration: `[section]` headers and `key = value` lines,
// `#` comments. Values are numbers, true/false, or strings (quotes optional).
// Every key is documented in `config_schema()`; unknown keys are errors.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "sgbp/error.hpp"
#include "sgbp/simulate.hpp"

namespace sgbp {

struct ConfigEntry {
  std::string value;
  int line = 0;
};

using ConfigMap = std::map<std::string, ConfigEntry>;  // "section.key" -> value

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  ConfigMap out;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    bool quoted = false;
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (s[p] == '"') quoted = !quoted;
      if (s[p] == '#' && !quoted) {
        s.resize(p);
        break;
      }
    }
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header");
      section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = detail::trim(std::string_view(s).substr(0, eq));
    std::string value = detail::trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) fail("duplicate key '" + full + "'");
    out[full] = {value, line};
  }
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// One documented configuration key.
struct ConfigKey {
  std::string name;
  std::string doc;
  std::function<void(SimulationConfig&, const std::string&)> set;
  std::function<std::string(const SimulationConfig&)> get;
};

namespace detail {

inline double to_double(const std::string& v) {
  double d = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), d);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return d;
}
inline int to_int(const std::string& v) {
  int i = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), i);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
  return i;
}
inline bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}
inline std::string from_bool(bool b) { return b ? "true" : "false"; }

inline ConfigKey num(std::string name, std::string doc, double SimulationConfig::*field) {
  return {std::move(name), std::move(doc), [field](SimulationConfig& c, const std::string& v) { c.*field = to_double(v); },
          [field](const SimulationConfig& c) { return format_double(c.*field); }};
}
inline ConfigKey integer(std::string name, std::string doc, int SimulationConfig::*field) {
  return {std::move(name), std::move(doc), [field](SimulationConfig& c, const std::string& v) { c.*field = to_int(v); },
          [field](const SimulationConfig& c) { return std::to_string(c.*field); }};
}
inline ConfigKey flag(std::string name, std::string doc, bool SimulationConfig::*field) {
  return {std::move(name), std::move(doc), [field](SimulationConfig& c, const std::string& v) { c.*field = to_bool(v); },
          [field](const SimulationConfig& c) { return from_bool(c.*field); }};
}
template <class Get, class Set>
ConfigKey custom(std::string name, std::string doc, Get get, Set set) {
  return {std::move(name), std::move(doc), set, get};
}

inline std::string optional_to_string(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }
inline std::optional<double> optional_from_string(const std::string& v) {
  if (v == "auto") return std::nullopt;
  return to_double(v);
}

}  // namespace detail

inline const std::vector<ConfigKey>& config_schema() {
  using namespace detail;
  using C = SimulationConfig;
  static const std::vector<ConfigKey> keys = {
      custom("run.mode", "stochastic_recombination | no_recombination",
             [](const C& c) { return to_string(c.mode); },
             [](C& c, const std::string& v) { c.mode = parse_recombination_mode(v); }),
      num("run.final_time_ps", "simulated time in ps", &C::final_time),
      num("run.output_interval_ps", "moment output cadence in ps", &C::output_interval),
      integer("run.snapshot_every", "phase-space snapshot every n-th output (0 = final only)", &C::snapshot_every),
      integer("run.threads", "worker count (the solver is single-threaded; recorded only)", &C::threads),

      integer("grid.nx", "x cells on [0, 1]", &C::nx),
      integer("grid.nr", "energy cells on [0, r_max]", &C::nr),
      integer("grid.nmu", "cells in mu = cos(angle) on [-1, 1]", &C::nmu),
      custom("grid.r_max", "energy cutoff in kB T_L", [](const C& c) { return format_double(c.scaling.r_max); },
             [](C& c, const std::string& v) { c.scaling.r_max = to_double(v); }),

      custom("device.n_plus", "contact doping, 1/m^3", [](const C& c) { return format_double(c.diode.n_plus); },
             [](C& c, const std::string& v) { c.diode.n_plus = to_double(v); }),
      custom("device.n_channel", "channel doping, 1/m^3", [](const C& c) { return format_double(c.diode.n_channel); },
             [](C& c, const std::string& v) { c.diode.n_channel = to_double(v); }),
      custom("device.channel_begin", "channel start, fraction of the device length",
             [](const C& c) { return format_double(c.diode.channel_begin); },
             [](C& c, const std::string& v) { c.diode.channel_begin = to_double(v); }),
      custom("device.channel_end", "channel end, fraction of the device length",
             [](const C& c) { return format_double(c.diode.channel_end); },
             [](C& c, const std::string& v) { c.diode.channel_end = to_double(v); }),
      custom("device.bias_volts", "potential at x = 1 (x = 0 is grounded)",
             [](const C& c) { return format_double(c.diode.bias); },
             [](C& c, const std::string& v) { c.diode.bias = to_double(v); }),
      flag("device.uniform_doping", "use n_plus everywhere (no junctions)", &C::uniform_doping),

      custom("random.N", "the random phonon scale is beta + z with |z| <= beta / N",
             [](const C& c) { return format_double(c.scaling.N); },
             [](C& c, const std::string& v) { c.scaling.N = to_double(v); }),
      custom("random.basis", "orthonormal | paper_unnormalized", [](const C& c) { return to_string(c.basis); },
             [](C& c, const std::string& v) { c.basis = parse_normalization(v); }),
      integer("random.quadrature_nodes", "Gauss nodes for chaos projections", &C::basis_quadrature),

      num("numerics.cfl", "CFL number in (0, 1)", &C::cfl),
      integer("numerics.shell_nodes", "Gauss nodes per collision shell segment", &C::shell_nodes),
      custom("numerics.collision_form", "full | split (recombination written as a correction)",
             [](const C& c) { return std::string(c.collision_form == CollisionForm::full ? "full" : "split"); },
             [](C& c, const std::string& v) {
               if (v == "full") c.collision_form = CollisionForm::full;
               else if (v == "split") c.collision_form = CollisionForm::split;
               else throw ConfigError("expected full or split, got '" + v + "'");
             }),
      custom("numerics.loss_weighting",
             "conservative | maxwellian_ratio (loss weight = partner gain weight times M(p')/M(p))",
             [](const C& c) { return to_string(c.loss_weighting); },
             [](C& c, const std::string& v) { c.loss_weighting = parse_loss_weighting(v); }),
      custom("numerics.initial_condition", "maxwellian | discrete_equilibrium",
             [](const C& c) { return to_string(c.initial); },
             [](C& c, const std::string& v) { c.initial = parse_initial_condition(v); }),
      flag("numerics.collisions", "include the collision operator", &C::collisions),
      flag("numerics.self_consistent_field", "solve Poisson each stage (false: E = 0)", &C::self_consistent_field),
      custom("numerics.x_boundary", "charge_neutral | periodic",
             [](const C& c) { return std::string(c.x_boundary == XBoundary::periodic ? "periodic" : "charge_neutral"); },
             [](C& c, const std::string& v) {
               if (v == "charge_neutral") c.x_boundary = XBoundary::charge_neutral;
               else if (v == "periodic") c.x_boundary = XBoundary::periodic;
               else throw ConfigError("expected charge_neutral or periodic, got '" + v + "'");
             }),

      custom("physics.lattice_temperature", "K", [](const C& c) { return format_double(c.constants.lattice_temperature); },
             [](C& c, const std::string& v) { c.constants.lattice_temperature = to_double(v); }),
      custom("physics.phonon_energy_ev", "optical phonon energy, eV",
             [](const C& c) { return format_double(c.constants.phonon_energy_ev); },
             [](C& c, const std::string& v) { c.constants.phonon_energy_ev = to_double(v); }),
      custom("physics.effective_mass_ratio", "m* / m_e",
             [](const C& c) { return format_double(c.constants.effective_mass_ratio); },
             [](C& c, const std::string& v) { c.constants.effective_mass_ratio = to_double(v); }),
      custom("physics.relative_permittivity", "eps_r",
             [](const C& c) { return format_double(c.constants.relative_permittivity); },
             [](C& c, const std::string& v) { c.constants.relative_permittivity = to_double(v); }),
      custom("physics.optical_coupling", "K in J m^3/s (0 = silicon value)",
             [](const C& c) { return format_double(c.constants.optical_coupling); },
             [](C& c, const std::string& v) { c.constants.optical_coupling = to_double(v); }),
      custom("physics.acoustic_coupling", "K0 in J m^3/s (0 = silicon value)",
             [](const C& c) { return format_double(c.constants.acoustic_coupling); },
             [](C& c, const std::string& v) { c.constants.acoustic_coupling = to_double(v); }),
      custom("physics.beta_rounding_digits", "significant digits kept in beta (0 = none)",
             [](const C& c) { return std::to_string(c.scaling.beta_rounding_digits); },
             [](C& c, const std::string& v) { c.scaling.beta_rounding_digits = to_int(v); }),
      custom("physics.length_scale", "m", [](const C& c) { return format_double(c.scaling.length_scale); },
             [](C& c, const std::string& v) { c.scaling.length_scale = to_double(v); }),
      custom("physics.time_scale", "s", [](const C& c) { return format_double(c.scaling.time_scale); },
             [](C& c, const std::string& v) { c.scaling.time_scale = to_double(v); }),
      custom("physics.potential_scale", "V", [](const C& c) { return format_double(c.scaling.potential_scale); },
             [](C& c, const std::string& v) { c.scaling.potential_scale = to_double(v); }),
      custom("physics.c_E", "force coefficient override (auto = derived)",
             [](const C& c) { return optional_to_string(c.scaling.c_E); },
             [](C& c, const std::string& v) { c.scaling.c_E = optional_from_string(v); }),
      custom("physics.c_P", "Poisson coefficient override (auto = derived)",
             [](const C& c) { return optional_to_string(c.scaling.c_P); },
             [](C& c, const std::string& v) { c.scaling.c_P = optional_from_string(v); }),
  };
  return keys;
}

/// Applies parsed entries on top of `base`; errors carry the source line.
inline SimulationConfig apply_config(const ConfigMap& map, SimulationConfig base = {},
                                     const std::string& origin = "<config>") {
  const auto& schema = config_schema();
  for (const auto& [name, entry] : map) {
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const ConfigKey& k) { return k.name == name; });
    const std::string where = origin + ":" + std::to_string(entry.line) + ": ";
    if (it == schema.end()) throw ConfigError(where + "unknown key '" + name + "'");
    try {
      it->set(base, entry.value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + name + ": " + e.what());
    }
  }
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return base;
}

inline SimulationConfig load_simulation_config(const std::string& path) {
  return apply_config(load_config_file(path), {}, path);
}

/// Full configuration in the parseable text format, documented per key.
inline std::string dump_config(const SimulationConfig& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : config_schema()) {
    const auto dot = k.name.find('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << "# " << k.doc << "\n" << k.name.substr(dot + 1) << " = " << k.get(c) << "\n";
  }
  return out.str();
}

/// Flat name -> value view, used for the manifest echo.
inline std::map<std::string, std::string> config_values(const SimulationConfig& c) {
  std::map<std::string, std::string> out;
  for (const auto& k : config_schema()) out[k.name] = k.get(c);
  return out;
}

}  // namespace sgbp
