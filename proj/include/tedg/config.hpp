#pragma once

// Configuration for the command-line driver: a JSON file with nested
// sections, dotted-path overrides from the command line, per-command
// validation, and a fully defaulted "effective" dump that reproduces the run.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

#include "tedg/materials.hpp"
#include "tedg/mesh.hpp"
#include "tedg/timestep.hpp"
#include "tedg/types.hpp"

namespace tedg {

using Json = nlohmann::json;

struct MeshConfig {
  std::string source = "structured"; // "structured" or "file"
  int n_per_side = 8;
  Real lo = -1.0;
  Real hi = 1.0;
  std::string path;
  std::string format = "simple_ascii";
};

struct ScenarioSpec {
  std::string name = "manufactured"; // manufactured, one_circle, three_circles
  Real eps_inside = 1.2;
  Real wave_number = 10.0;
};

struct OutputConfig {
  std::string directory = "tedg_out";
  long snapshot_stride = 0; // 0: final snapshot only
  std::vector<Vec2> probes;
};

struct ConvergenceConfig {
  std::vector<int> resolutions;  // structured mesh cells per side
  std::vector<int> orders;       // polynomial degrees for the space study
  std::vector<Real> dts;         // time steps for the time study
  std::vector<Real> fluxes;      // alpha values for the space study
  std::vector<std::string> modes; // scheme modes for the time study
};

struct RunConfig {
  std::string command;
  ScenarioSpec scenario;
  MeshConfig mesh;
  int order = 2;
  SchemeConfig scheme;
  bool has_dt = false;
  Real dt = 0.0;
  Real cfl_safety = 0.5;
  Real t_start = 0.0;
  Real t_final = 1.0;
  OutputConfig output;
  ConvergenceConfig convergence;
  CflConstants constants;
  Json effective; // fully defaulted config, written next to the outputs
};

namespace detail {

inline void check_keys(const Json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return it.key() == a; }))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

inline Real as_real(const Json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<Real>();
}

inline int as_int(const Json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  return v.get<int>();
}

inline std::string as_string(const Json& v, const std::string& what) {
  if (!v.is_string()) throw ConfigError(what + " must be a string");
  return v.get<std::string>();
}

inline Real get_real(const Json& sec, const char* key, Real dflt) {
  return sec.contains(key) ? as_real(sec.at(key), key) : dflt;
}

inline int get_int(const Json& sec, const char* key, int dflt) {
  return sec.contains(key) ? as_int(sec.at(key), key) : dflt;
}

inline std::string get_string(const Json& sec, const char* key, const std::string& dflt) {
  return sec.contains(key) ? as_string(sec.at(key), key) : dflt;
}

} // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, /*allow comments*/ true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("malformed config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

// Applies "--set a.b.c=value"; the value is parsed as JSON when possible and
// taken as a plain string otherwise, so --set scheme.alpha=0.5 and
// --set mesh.source=structured both work.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  Json* node = &j;
  size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
    if (dot == std::string::npos) {
      Json parsed;
      try {
        parsed = Json::parse(value);
      } catch (const Json::parse_error&) {
        parsed = value;
      }
      (*node)[key] = parsed;
      return;
    }
    Json& next = (*node)[key];
    if (!next.is_object() && !next.is_null())
      throw ConfigError("override path '" + path + "' descends into non-object '" + key + "'");
    if (next.is_null()) next = Json::object();
    node = &next;
    start = dot + 1;
  }
}

// Parses and validates the config for one command, filling per-command
// defaults. The returned RunConfig carries the effective JSON whose re-run
// reproduces the outputs byte for byte.
inline RunConfig parse_run_config(const Json& j, const std::string& command) {
  using detail::as_int;
  using detail::as_real;
  using detail::as_string;
  using detail::check_keys;
  using detail::get_int;
  using detail::get_real;
  using detail::get_string;

  static const std::vector<std::string> known_commands = {
      "mesh-info", "convergence-space", "convergence-time", "scatter", "run"};
  if (std::find(known_commands.begin(), known_commands.end(), command) == known_commands.end())
    throw ConfigError("unknown command '" + command + "'");

  check_keys(j, "config root",
             {"command", "scenario", "mesh", "order", "scheme", "time", "output", "convergence",
              "constants"});
  if (j.contains("command")) {
    const std::string stored = as_string(j.at("command"), "command");
    if (stored != command)
      throw ConfigError("config file is for command '" + stored + "', invoked as '" + command +
                        "'");
  }

  RunConfig cfg;
  cfg.command = command;
  const bool is_scatter = command == "scatter";

  // scenario
  {
    const Json sec = j.contains("scenario") ? j.at("scenario") : Json::object();
    if (!sec.is_object()) throw ConfigError("'scenario' must be an object");
    check_keys(sec, "scenario", {"name", "eps_inside", "wave_number"});
    cfg.scenario.name = get_string(sec, "name", is_scatter ? "one_circle" : "manufactured");
    cfg.scenario.eps_inside = get_real(sec, "eps_inside", 1.2);
    cfg.scenario.wave_number = get_real(sec, "wave_number", 10.0);
    static const std::vector<std::string> names = {"manufactured", "one_circle", "three_circles"};
    if (std::find(names.begin(), names.end(), cfg.scenario.name) == names.end())
      throw ConfigError("unknown scenario '" + cfg.scenario.name + "'");
    if (!(cfg.scenario.eps_inside > 0.0))
      throw ConfigError("scenario.eps_inside must be positive");
    if (!(cfg.scenario.wave_number > 0.0))
      throw ConfigError("scenario.wave_number must be positive");
  }

  // mesh
  {
    const Json sec = j.contains("mesh") ? j.at("mesh") : Json::object();
    if (!sec.is_object()) throw ConfigError("'mesh' must be an object");
    check_keys(sec, "mesh", {"source", "n_per_side", "lo", "hi", "path", "format"});
    cfg.mesh.source = get_string(sec, "source", "structured");
    cfg.mesh.n_per_side = get_int(sec, "n_per_side", is_scatter ? 16 : 8);
    cfg.mesh.lo = get_real(sec, "lo", -1.0);
    cfg.mesh.hi = get_real(sec, "hi", 1.0);
    cfg.mesh.path = get_string(sec, "path", "");
    cfg.mesh.format = get_string(sec, "format", "simple_ascii");
    if (cfg.mesh.source == "structured") {
      if (cfg.mesh.n_per_side < 1) throw ConfigError("mesh.n_per_side must be at least 1");
      if (!(cfg.mesh.lo < cfg.mesh.hi)) throw ConfigError("mesh bounds need lo < hi");
    } else if (cfg.mesh.source == "file") {
      if (cfg.mesh.path.empty()) throw ConfigError("mesh.source 'file' requires mesh.path");
      mesh_format_from_string(cfg.mesh.format); // validates the name
    } else {
      throw ConfigError("mesh.source must be 'structured' or 'file'");
    }
  }

  // order
  cfg.order = get_int(j, "order", is_scatter ? 4 : 2);
  if (cfg.order < 1) throw ConfigError("order must be at least 1");

  // scheme
  {
    const Json sec = j.contains("scheme") ? j.at("scheme") : Json::object();
    if (!sec.is_object()) throw ConfigError("'scheme' must be an object");
    check_keys(sec, "scheme", {"mode", "alpha", "dt", "cfl_safety", "tol", "max_iterations"});
    cfg.scheme.mode = scheme_mode_from_string(get_string(sec, "mode", "predictor_corrector"));
    cfg.scheme.alpha = get_real(sec, "alpha", is_scatter ? 0.0 : 1.0);
    cfg.scheme.tol = get_real(sec, "tol", 1e-10);
    cfg.scheme.max_iterations = get_int(sec, "max_iterations", 200);
    if (cfg.scheme.alpha < 0.0 || cfg.scheme.alpha > 1.0)
      throw ConfigError("scheme.alpha must lie in [0, 1]");
    if (!(cfg.scheme.tol > 0.0)) throw ConfigError("scheme.tol must be positive");
    if (cfg.scheme.max_iterations < 1)
      throw ConfigError("scheme.max_iterations must be at least 1");
    if (sec.contains("dt") && sec.contains("cfl_safety"))
      throw ConfigError("scheme.dt and scheme.cfl_safety are mutually exclusive");
    if (sec.contains("dt")) {
      cfg.has_dt = true;
      cfg.dt = as_real(sec.at("dt"), "scheme.dt");
      if (!(cfg.dt > 0.0)) throw ConfigError("scheme.dt must be positive");
    } else if (sec.contains("cfl_safety")) {
      cfg.cfl_safety = as_real(sec.at("cfl_safety"), "scheme.cfl_safety");
      if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
        throw ConfigError("scheme.cfl_safety must lie in (0, 1]");
    } else if (is_scatter) {
      cfg.has_dt = true;
      cfg.dt = 0.002;
    }
  }

  // time
  {
    const Json sec = j.contains("time") ? j.at("time") : Json::object();
    if (!sec.is_object()) throw ConfigError("'time' must be an object");
    check_keys(sec, "time", {"t_start", "t_final"});
    cfg.t_start = get_real(sec, "t_start", 0.0);
    cfg.t_final = get_real(sec, "t_final", is_scatter ? 0.8 : 1.0);
    if (!(cfg.t_final > 0.0)) throw ConfigError("time.t_final must be positive");
  }

  // output
  {
    const Json sec = j.contains("output") ? j.at("output") : Json::object();
    if (!sec.is_object()) throw ConfigError("'output' must be an object");
    check_keys(sec, "output", {"directory", "snapshot_stride", "probes"});
    cfg.output.directory = get_string(sec, "directory", "tedg_out");
    cfg.output.snapshot_stride = get_int(sec, "snapshot_stride", 0);
    if (cfg.output.directory.empty()) throw ConfigError("output.directory must not be empty");
    if (cfg.output.snapshot_stride < 0)
      throw ConfigError("output.snapshot_stride must be non-negative");
    if (sec.contains("probes")) {
      const Json& probes = sec.at("probes");
      if (!probes.is_array()) throw ConfigError("output.probes must be an array of [x, y] pairs");
      for (const Json& p : probes) {
        if (!p.is_array() || p.size() != 2)
          throw ConfigError("output.probes entries must be [x, y] pairs");
        cfg.output.probes.push_back(
            {as_real(p.at(0), "probe x"), as_real(p.at(1), "probe y")});
      }
    }
  }

  // convergence
  {
    const Json sec = j.contains("convergence") ? j.at("convergence") : Json::object();
    if (!sec.is_object()) throw ConfigError("'convergence' must be an object");
    check_keys(sec, "convergence", {"resolutions", "orders", "dts", "fluxes", "modes"});
    auto int_list = [&](const char* key, std::vector<int> dflt) {
      if (!sec.contains(key)) return dflt;
      const Json& arr = sec.at(key);
      if (!arr.is_array()) throw ConfigError(std::string("convergence.") + key + " must be an array");
      std::vector<int> out;
      for (const Json& v : arr) out.push_back(as_int(v, std::string("convergence.") + key));
      return out;
    };
    auto real_list = [&](const char* key, std::vector<Real> dflt) {
      if (!sec.contains(key)) return dflt;
      const Json& arr = sec.at(key);
      if (!arr.is_array()) throw ConfigError(std::string("convergence.") + key + " must be an array");
      std::vector<Real> out;
      for (const Json& v : arr) out.push_back(as_real(v, std::string("convergence.") + key));
      return out;
    };
    cfg.convergence.resolutions = int_list("resolutions", {8, 16, 32});
    cfg.convergence.orders = int_list("orders", {cfg.order});
    cfg.convergence.dts = real_list("dts", {});
    cfg.convergence.fluxes = real_list("fluxes", {cfg.scheme.alpha});
    if (sec.contains("modes")) {
      const Json& arr = sec.at("modes");
      if (!arr.is_array()) throw ConfigError("convergence.modes must be an array");
      for (const Json& v : arr)
        cfg.convergence.modes.push_back(as_string(v, "convergence.modes"));
    } else {
      cfg.convergence.modes = {to_string(cfg.scheme.mode)};
    }
    for (int n : cfg.convergence.resolutions)
      if (n < 1) throw ConfigError("convergence.resolutions entries must be at least 1");
    for (int n : cfg.convergence.orders)
      if (n < 1) throw ConfigError("convergence.orders entries must be at least 1");
    for (Real v : cfg.convergence.dts)
      if (!(v > 0.0)) throw ConfigError("convergence.dts entries must be positive");
    for (Real v : cfg.convergence.fluxes)
      if (v < 0.0 || v > 1.0) throw ConfigError("convergence.fluxes entries must lie in [0, 1]");
    for (const std::string& m : cfg.convergence.modes) scheme_mode_from_string(m);
  }

  // constants
  {
    const Json sec = j.contains("constants") ? j.at("constants") : Json::object();
    if (!sec.is_object()) throw ConfigError("'constants' must be an object");
    check_keys(sec, "constants", {"c_inv", "c_tau"});
    cfg.constants.c_inv = get_real(sec, "c_inv", CflConstants{}.c_inv);
    cfg.constants.c_tau = get_real(sec, "c_tau", CflConstants{}.c_tau);
    if (!(cfg.constants.c_inv > 0.0) || !(cfg.constants.c_tau > 0.0))
      throw ConfigError("constants.c_inv and constants.c_tau must be positive");
  }

  // per-command requirements
  if (command == "convergence-space") {
    if (cfg.scenario.name != "manufactured")
      throw ConfigError("convergence studies use the manufactured scenario");
    if (cfg.convergence.resolutions.size() < 3)
      throw ConfigError("convergence-space needs at least 3 mesh resolutions");
    if (cfg.convergence.orders.empty())
      throw ConfigError("convergence-space needs at least one order");
    if (cfg.convergence.fluxes.empty())
      throw ConfigError("convergence-space needs at least one flux value");
    if (!cfg.has_dt)
      throw ConfigError("convergence-space needs a fixed scheme.dt");
  } else if (command == "convergence-time") {
    if (cfg.scenario.name != "manufactured")
      throw ConfigError("convergence studies use the manufactured scenario");
    if (cfg.convergence.dts.size() < 3)
      throw ConfigError("convergence-time needs at least 3 dt values");
    if (cfg.convergence.modes.empty())
      throw ConfigError("convergence-time needs at least one scheme mode");
  } else if (command == "scatter") {
    if (cfg.scenario.name == "manufactured")
      throw ConfigError("scatter needs a scattering scenario (one_circle or three_circles)");
    if (!cfg.has_dt) throw ConfigError("scatter needs a fixed scheme.dt");
  } else if (command == "run") {
    if (!cfg.has_dt && !(cfg.cfl_safety > 0.0))
      throw ConfigError("run needs scheme.dt or scheme.cfl_safety");
  }

  // effective dump
  Json eff;
  eff["command"] = cfg.command;
  eff["scenario"] = {{"name", cfg.scenario.name},
                     {"eps_inside", cfg.scenario.eps_inside},
                     {"wave_number", cfg.scenario.wave_number}};
  eff["mesh"] = {{"source", cfg.mesh.source},
                 {"n_per_side", cfg.mesh.n_per_side},
                 {"lo", cfg.mesh.lo},
                 {"hi", cfg.mesh.hi},
                 {"path", cfg.mesh.path},
                 {"format", cfg.mesh.format}};
  eff["order"] = cfg.order;
  eff["scheme"] = {{"mode", to_string(cfg.scheme.mode)},
                   {"alpha", cfg.scheme.alpha},
                   {"tol", cfg.scheme.tol},
                   {"max_iterations", cfg.scheme.max_iterations}};
  if (cfg.has_dt)
    eff["scheme"]["dt"] = cfg.dt;
  else
    eff["scheme"]["cfl_safety"] = cfg.cfl_safety;
  eff["time"] = {{"t_start", cfg.t_start}, {"t_final", cfg.t_final}};
  Json probes = Json::array();
  for (const Vec2& p : cfg.output.probes) probes.push_back({p.x, p.y});
  eff["output"] = {{"directory", cfg.output.directory},
                   {"snapshot_stride", cfg.output.snapshot_stride},
                   {"probes", probes}};
  eff["convergence"] = {{"resolutions", cfg.convergence.resolutions},
                        {"orders", cfg.convergence.orders},
                        {"dts", cfg.convergence.dts},
                        {"fluxes", cfg.convergence.fluxes},
                        {"modes", cfg.convergence.modes}};
  eff["constants"] = {{"c_inv", cfg.constants.c_inv}, {"c_tau", cfg.constants.c_tau}};
  cfg.effective = std::move(eff);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path, const std::string& command,
                                 const std::vector<std::string>& overrides = {}) {
  Json j = read_json_file(path);
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_run_config(j, command);
}

} // namespace tedg
