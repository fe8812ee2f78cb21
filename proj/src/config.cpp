#include "flatswarm/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "flatswarm/errors.hpp"

namespace flatswarm {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* want) {
  throw config_error("key '" + key + "': cannot parse '" + value + "' as " + want);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty()) bad_value(key, v, "a number");
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || !std::isfinite(out))
    bad_value(key, v, "a number");
  return out;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& value, const char* want) {
  const std::string v = trim(value);
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, want);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean (true/false/1/0)");
}

Vec2d parse_vec2(const std::string& key, const std::string& value) {
  const std::size_t comma = value.find(',');
  if (comma == std::string::npos) bad_value(key, value, "a pair \"a,b\"");
  return {parse_double(key, value.substr(0, comma)),
          parse_double(key, value.substr(comma + 1))};
}

CouplingModel parse_variant(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "nominal") return CouplingModel::nominal;
  if (v == "exact") return CouplingModel::exact;
  if (v == "approximate") return CouplingModel::approximate;
  bad_value(key, v, "one of nominal/exact/approximate");
}

InitMode parse_init(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "hover") return InitMode::hover;
  if (v == "consistent") return InitMode::consistent;
  bad_value(key, v, "one of hover/consistent");
}

void require(bool ok, const char* what) {
  if (!ok) throw config_error(what);
}

}  // namespace

const char* to_string(InitMode mode) {
  return mode == InitMode::hover ? "hover" : "consistent";
}

void ScenarioConfig::validate() const {
  require(n >= 1, "n must be at least 1");
  require(duration > 0.0, "duration must be positive");
  require(formation_gap >= 0.0, "formation_gap must be non-negative");
  require(dt > 0.0, "dt must be positive");
  require(control_rate > 0.0, "control_rate must be positive");
  require(threshold.x >= 0.0 && threshold.y >= 0.0,
          "threshold components must be non-negative");
  require(quad.mass > 0.0, "mass must be positive");
  require(quad.inertia > 0.0, "inertia must be positive");
  require(quad.gravity > 0.0, "gravity must be positive");
  require(downwash.c1 > 0.0 && downwash.c2 > 0.0, "wake constants must be positive");
  require(downwash.cd > 0.0 && downwash.span > 0.0 && downwash.rho > 0.0,
          "drag constants must be positive");
  require(q_scale > 0.0 && r_scale > 0.0, "LQR scales must be positive");
  const double ratio = 1.0 / (control_rate * dt);
  const double rounded = std::round(ratio);
  require(rounded >= 1.0 && std::fabs(ratio - rounded) <= 1e-9 * rounded,
          "the control period must be an integer multiple of dt");
}

long long ScenarioConfig::steps() const {
  return static_cast<long long>(std::floor(duration / dt + 1e-9));
}

int ScenarioConfig::steps_per_tick() const {
  return static_cast<int>(std::llround(1.0 / (control_rate * dt)));
}

ModelParams ScenarioConfig::model_params() const {
  return {quad, downwash, threshold, torque_coupling};
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw config_error("expected key=value, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = assignment.substr(eq + 1);

  if (key == "n")
    cfg.n = parse_integer<int>(key, value, "an integer");
  else if (key == "duration")
    cfg.duration = parse_double(key, value);
  else if (key == "speed")
    cfg.speed = parse_double(key, value);
  else if (key == "formation_gap")
    cfg.formation_gap = parse_double(key, value);
  else if (key == "dt")
    cfg.dt = parse_double(key, value);
  else if (key == "control_rate")
    cfg.control_rate = parse_double(key, value);
  else if (key == "variant")
    cfg.variant = parse_variant(key, value);
  else if (key == "threshold")
    cfg.threshold = parse_vec2(key, value);
  else if (key == "torque_coupling")
    cfg.torque_coupling = parse_bool(key, value);
  else if (key == "mass")
    cfg.quad.mass = parse_double(key, value);
  else if (key == "inertia")
    cfg.quad.inertia = parse_double(key, value);
  else if (key == "gravity")
    cfg.quad.gravity = parse_double(key, value);
  else if (key == "c1")
    cfg.downwash.c1 = parse_double(key, value);
  else if (key == "c2")
    cfg.downwash.c2 = parse_double(key, value);
  else if (key == "cd")
    cfg.downwash.cd = parse_double(key, value);
  else if (key == "span")
    cfg.downwash.span = parse_double(key, value);
  else if (key == "rho")
    cfg.downwash.rho = parse_double(key, value);
  else if (key == "q_scale")
    cfg.q_scale = parse_double(key, value);
  else if (key == "r_scale")
    cfg.r_scale = parse_double(key, value);
  else if (key == "seed")
    cfg.seed = parse_integer<std::uint64_t>(key, value, "an unsigned integer");
  else if (key == "init")
    cfg.init = parse_init(key, value);
  else
    throw config_error("unknown key '" + key + "'");
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(base, line);
    } catch (const config_error& e) {
      throw config_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ScenarioConfig parse_config_file(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  try {
    return parse_config(in, base);
  } catch (const config_error& e) {
    throw config_error(path + ": " + e.what());
  }
}

ScenarioConfig scenario_preset(const std::string& name) {
  ScenarioConfig cfg;  // defaults already describe the 4-vehicle crossing
  if (name == "paper-n4-exact") {
    cfg.variant = CouplingModel::exact;
  } else if (name == "paper-n4-approx") {
    cfg.variant = CouplingModel::approximate;
  } else if (name == "paper-n4-nominal") {
    cfg.variant = CouplingModel::nominal;
  } else if (name == "paper-n10-sweep") {
    cfg.n = 10;
    cfg.variant = CouplingModel::approximate;
  } else {
    throw config_error("unknown preset '" + name + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace flatswarm
