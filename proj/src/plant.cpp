#include "flatswarm/plant.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flatswarm/errors.hpp"

namespace flatswarm {

Vec2d uncoupled_level_dynamics(int level, const Vec2d& next, const QuadParams& qp) {
  switch (level) {
    case 1:
    case 3:
      return next;
    case 2:
      return thrust_accel(next, qp);
    case 4:
      return {next.x, next.y / qp.inertia};
  }
  throw std::invalid_argument("level must be in 1..4");
}

JointState joint_dynamics(const JointState& state, const ControlInput& input,
                          CouplingModel model, const ModelParams& mp) {
  const int n = state.size();
  if (static_cast<int>(input.u.size()) != n)
    throw std::invalid_argument("input size does not match vehicle count");
  const CouplingGraph g = build_graph(state, model, mp.threshold);

  JointState dx;
  dx.sub.resize(n);
  for (int i = 0; i < n; ++i) {
    const SubsystemState& xi = state.sub[i];
    SubsystemState& di = dx.sub[i];
    di.level[0] = uncoupled_level_dynamics(1, xi.level[1], mp.quad);
    di.level[1] = uncoupled_level_dynamics(2, xi.level[2], mp.quad);
    di.level[2] = uncoupled_level_dynamics(3, xi.level[3], mp.quad);
    di.level[3] = uncoupled_level_dynamics(4, input.u[i], mp.quad);

    if (model == CouplingModel::nominal) continue;
    double force = 0.0, torque = 0.0;
    for (int j : g.in[i]) {
      const Vec2d delta = state.sub[j].pos() - xi.pos();
      if (model == CouplingModel::exact) {
        force += drag_force(delta, state.sub[j].thrust(), mp.downwash);
        if (mp.torque_coupling)
          torque += drag_torque(delta, state.sub[j].thrust(), mp.downwash);
      } else {
        force += approx_drag_force(delta, mp.downwash, mp.quad);
      }
    }
    di.level[1].y += force / mp.quad.mass;
    if (model == CouplingModel::exact && mp.torque_coupling)
      di.level[3].y += torque / mp.quad.inertia;
  }
  return dx;
}

RegularityReport regularity_check(const JointState& state, const ModelParams& mp,
                                  double threshold) {
  RegularityReport rep;
  rep.threshold = threshold;
  const int n = state.size();
  rep.dets.resize(n);
  rep.min_det = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double m = mp.quad.mass;
    rep.dets[i] = {1.0, std::fabs(state.sub[i].thrust()) / (m * m), 1.0,
                   1.0 / mp.quad.inertia};
    for (int k = 1; k <= 4; ++k) {
      const double d = rep.dets[i][k - 1];
      rep.joint_product *= d;
      rep.min_det = std::min(rep.min_det, d);
      // a margin that is not a finite positive number is no certificate at all
      if (!std::isfinite(d) || d < threshold) rep.flagged.emplace_back(i, k);
    }
  }
  return rep;
}

}  // namespace flatswarm
