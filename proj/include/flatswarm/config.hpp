#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "flatswarm/graph.hpp"
#include "flatswarm/plant.hpp"

namespace flatswarm {

// How the vehicles start relative to their references. hover puts every
// vehicle on its reference with weight-balancing thrust and zero tilt;
// consistent solves the joint inverse at t = 0 so the initial state already
// carries the wake couplings.
enum class InitMode { hover, consistent };

const char* to_string(InitMode mode);

// Full description of one closed-loop experiment. Defaults reproduce the
// four-vehicle crossing scenario under the exact controller.
struct ScenarioConfig {
  int n = 4;                  // vehicle count
  double duration = 5.0;      // [s]
  double speed = 1.0;         // crossing speed [m/s]
  double formation_gap = 1.0; // vertical spacing between reference altitudes [m]
  double dt = 0.01;           // integrator step [s]
  double control_rate = 100;  // controller tick rate [Hz]
  CouplingModel variant = CouplingModel::exact;
  Vec2d threshold{0.5, 2.5};  // approximate-model displacement box
  bool torque_coupling = false;
  QuadParams quad{};
  DownwashParams downwash{};
  double q_scale = 100.0;  // LQR state weight, Q = q_scale I
  double r_scale = 1.0;    // LQR input weight, R = r_scale I
  std::uint64_t seed = 0;  // recorded in outputs; the scenario is deterministic
  InitMode init = InitMode::consistent;

  // throws config_error when any invariant fails
  void validate() const;

  long long steps() const;          // floor(duration / dt)
  int steps_per_tick() const;       // control period over dt, exact integer
  ModelParams model_params() const;
};

// Applies one "key=value" assignment; unknown keys and malformed values
// throw config_error.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

// Parses a flat key=value stream ('#' starts a comment, blank lines ignored)
// on top of the given base configuration.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig parse_config_file(const std::string& path, ScenarioConfig base = {});

// Named experiment presets; unknown names throw config_error.
ScenarioConfig scenario_preset(const std::string& name);

}  // namespace flatswarm
