#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "flatswarm/downwash.hpp"
#include "flatswarm/errors.hpp"
#include "flatswarm/graph.hpp"
#include "flatswarm/jet.hpp"
#include "flatswarm/plant.hpp"
#include "flatswarm/state.hpp"

namespace flatswarm {

// Flat outputs for the whole team: y[i] is vehicle i's output trajectory as
// a pair of truncated Taylor expansions around the current instant. All jets
// must share one order D >= 4; the recovered input loses four orders, so
// D = 4 yields inputs as plain values and D = 5 additionally exposes their
// first derivatives.
struct FlatJetBundle {
  std::vector<Vec2<Jet>> y;

  int size() const { return static_cast<int>(y.size()); }
  int order() const { return y.empty() ? -1 : y.front().x.order(); }
};

// Result of the joint inverse map. phi[i][k-1] holds vehicle i's chain
// variable at level k (k = 1..4) and, at k = 5, its input; the jet order
// drops by one per level. states and inputs are the leading coefficients.
struct DiffeoOutput {
  JointState states;
  ControlInput inputs;
  std::vector<std::vector<Vec2<Jet>>> phi;
};

// Restricted flat data: output jets keyed by vehicle index. Evaluation
// touches only what the coupling structure demands and reports a missing
// vehicle as an information-contract violation.
struct PartialBundle {
  std::map<int, Vec2<Jet>> y;
};

// One vehicle's share of the joint map, produced from restricted data.
struct VehicleEval {
  SubsystemState state;
  Vec2d input;
  std::vector<Vec2<Jet>> phi;  // levels 1..5 for this vehicle only
};

// Level-wise inverse of the vehicle chain. `rate` is the commanded time
// derivative of the level-k block; the return value is the block one level
// down that realizes it:
//   level 1, 3: identity (velocity, attitude rates pass through)
//   level 2:    thrust/tilt from commanded acceleration; undefined in free
//               fall (zero apparent acceleration), which raises
//               singular_inverse_error
//   level 4:    inputs (thrust acceleration, torque) from commanded rates
// The tilt angle is continuous in the commanded acceleration only within one
// branch of atan2; `tilt_hint` selects the branch nearest the hint so a
// caller tracking a trajectory can keep the angle continuous.
template <class S>
Vec2<S> inverse_level_map(int level, const Vec2<S>& rate, const QuadParams& qp,
                          double tilt_hint = 0.0) {
  using std::atan2;
  using std::sqrt;
  switch (level) {
    case 1:
    case 3:
      return rate;
    case 2: {
      const S ax = rate.x;
      const S ay = rate.y + qp.gravity;
      if (detail::lead(ax) == 0.0 && detail::lead(ay) == 0.0)
        throw singular_inverse_error(
            "level-2 inverse undefined in free fall (zero apparent "
            "acceleration)");
      const S thrust = qp.mass * sqrt(ax * ax + ay * ay);
      S tilt = atan2(-ax, ay);
      constexpr double two_pi = 6.283185307179586476925286766559;
      const double shift =
          two_pi * std::round((tilt_hint - detail::lead(tilt)) / two_pi);
      if (shift != 0.0) tilt += shift;
      return {thrust, tilt};
    }
    case 4:
      return {rate.x, qp.inertia * rate.y};
    default:
      throw std::invalid_argument("inverse_level_map: level must be 1..4");
  }
}

// Joint inverse of the flat map, evaluated in the only order the coupling
// admits: level by level, vehicles ascending within a level. Vehicle i's
// level-k block consumes its own previous level plus, through the coupling,
// the positions (and under the exact model the already-recovered thrusts) of
// its in-neighbors. An exact-model in-neighbor with a larger index would be
// needed before it is computed; that raises ordering_error. `model` must
// match the model the graph was built for. `tilt_hints`, when non-empty,
// must hold one entry per vehicle and pins each tilt branch.
DiffeoOutput build_joint_diffeo(const FlatJetBundle& bundle,
                                CouplingModel model, const CouplingGraph& g,
                                const ModelParams& mp,
                                const std::vector<double>& tilt_hints = {});

// Vehicle i's block of the joint inverse from restricted data. The needed
// set is the closure of the coupling dependencies (in-neighbor positions;
// under the exact model, transitively, in-neighbor thrust chains); a needed
// vehicle absent from `data` raises info_contract_error. Rows that are
// evaluated follow the same order and arithmetic as build_joint_diffeo, so
// the result is bit-identical to the corresponding block of the full build
// (given the same hint for vehicle i; hints only shift reported tilts and
// never feed back into thrusts or inputs).
VehicleEval evaluate_vehicle(int i, const PartialBundle& data,
                             CouplingModel model, const CouplingGraph& g,
                             const ModelParams& mp, double tilt_hint = 0.0);

// Forward flat map: each vehicle's measured flat block
//   z^i = [y, dy/dt, d2y/dt2, d3y/dt3] in R^8
// reconstructed from the plant state alone. Acceleration and jerk are lifted
// through the thrust map plus the coupling of the requested model with
// order-1 jets, so vehicle i touches only its own state and its
// in-neighbors' positions, velocities, and (exact model) thrust levels.
std::vector<std::array<double, 8>> forward_flat_states(
    const JointState& state, CouplingModel model, const CouplingGraph& g,
    const ModelParams& mp);

}  // namespace flatswarm
