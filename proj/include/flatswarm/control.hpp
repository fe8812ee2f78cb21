#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>

#include "flatswarm/flatness.hpp"
#include "flatswarm/graph.hpp"
#include "flatswarm/jet.hpp"
#include "flatswarm/plant.hpp"
#include "flatswarm/state.hpp"

namespace flatswarm {

// One subsystem's flat-space sample: the stacked flat state
// z = [y, dy/dt, d2y/dt2, d3y/dt3] in R^8 and the virtual input v = d4y/dt4.
struct FlatPoint {
  std::array<double, 8> z{};
  Vec2d v{};
};

// Chain-of-integrators normal form: A shifts blocks of size m one level up,
// B injects into the last block, so z' = A z + B v is y^(r) = v stacked.
struct BrunovskyPair {
  Eigen::MatrixXd A, B;
};

BrunovskyPair brunovsky_pair(int r, int m);

// A stabilizing state feedback with its certificates: u = -K z has
// A - B K Hurwitz, and P is the stabilizing Riccati solution that produced
// K, kept so callers can audit the residual.
struct GainSet {
  Eigen::MatrixXd A, B, K, P;
};

// Solves the continuous algebraic Riccati equation
//   A'P + PA - PBR^{-1}B'P + Q = 0
// by Newton-Kleinman iteration (Lyapunov step solved through the Kronecker
// system), initialized from pole placement of the integrator chain at
// -1, -2, ..., -r. The initializer is tailored to the Brunovsky pairs this
// library builds; any (A, B) it cannot stabilize, a singular Lyapunov step,
// divergence, a final residual above 1e-9, or a non-Hurwitz closed loop
// raises synthesis_error.
GainSet lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

// The planar-quadrotor gain set: r = 4, m = 2 chain with Q = q_scale * I_8
// and R = r_scale * I_2.
GainSet quadrotor_gains(double q_scale = 100.0, double r_scale = 1.0);

// Tracking law in flat space: v = v_ref - K (z - z_ref).
Vec2d tracking_virtual_input(const std::array<double, 8>& z,
                             const FlatPoint& ref, const Eigen::MatrixXd& K);

// A flat sample as the degree-4 output jet [y, y', y''/2!, y'''/3!, v/4!]
// the diffeomorphism consumes.
Vec2<Jet> flat_point_jets(const FlatPoint& p);

// One distributed controller evaluation: assembles output jets from the
// gathered (z, v) pairs and evaluates vehicle i's input through the
// restricted joint inverse. The controller can only touch gathered data, so
// information locality is structural: a needed vehicle that was not gathered
// raises info_contract_error.
Vec2d distributed_control_step(int i, const std::map<int, FlatPoint>& gathered,
                               CouplingModel variant, const CouplingGraph& g,
                               const ModelParams& mp, double tilt_hint = 0.0);

}  // namespace flatswarm
