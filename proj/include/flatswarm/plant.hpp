#pragma once

#include <array>
#include <utility>
#include <vector>

#include "flatswarm/downwash.hpp"
#include "flatswarm/graph.hpp"
#include "flatswarm/state.hpp"

namespace flatswarm {

// Everything the physics needs besides the state: vehicle constants, wake
// constants, the approximate model's displacement box, and whether the wake
// torque enters the exact model.
struct ModelParams {
  QuadParams quad{};
  DownwashParams downwash{};
  Vec2d threshold{0.5, 2.5};
  bool torque_coupling = false;
};

// Acceleration produced by a thrust/tilt pair: (1/m)(-T sin th, T cos th - mg).
// Shared between the double and jet paths so both round identically.
template <class S>
Vec2<S> thrust_accel(const Vec2<S>& thrust_tilt, const QuadParams& qp) {
  using std::cos;
  using std::sin;
  const S& T = thrust_tilt.x;
  const S& th = thrust_tilt.y;
  return {-T * sin(th) / qp.mass,
          (T * cos(th) - qp.mass * qp.gravity) / qp.mass};
}

// One level of the uncoupled pure-feedback chain. Levels 1 and 3 pass the
// next level through, level 2 turns thrust/tilt into acceleration, level 4
// maps the raw input (thrust accel, torque) onto (thrust accel, body angular
// accel). Only the next level enters because the chain is a cascade.
Vec2d uncoupled_level_dynamics(int level, const Vec2d& next, const QuadParams& qp);

// Time derivative of the joint state under the requested coupling model. The
// physical plant is the exact model (plus wake torque when enabled); nominal
// and approximate are the controller-side models, exposed here for model
// studies and tests. Throws ordering_error out of graph construction when the
// exact model meets an altitude tie.
JointState joint_dynamics(const JointState& state, const ControlInput& input,
                          CouplingModel model, const ModelParams& mp);

// Level-wise invertibility margins of the uncoupled chain, the certificates
// that the flatness construction stays well defined at this state.
struct RegularityReport {
  // dets[i][k-1] = |det of the level-k map of vehicle i w.r.t. its next level|
  std::vector<std::array<double, 4>> dets;
  double joint_product = 1.0;
  double min_det = 0.0;
  double threshold = 0.0;
  std::vector<std::pair<int, int>> flagged;  // (vehicle, level) below threshold

  bool ok() const { return flagged.empty(); }
};

RegularityReport regularity_check(const JointState& state, const ModelParams& mp,
                                  double threshold = 1e-8);

}  // namespace flatswarm
