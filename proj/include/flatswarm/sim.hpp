#pragma once

#include <string>
#include <vector>

#include "flatswarm/config.hpp"
#include "flatswarm/control.hpp"
#include "flatswarm/state.hpp"

namespace flatswarm {

// Classical RK4 stage for any vector-space state (needs state + state and
// double * state). Shared by the plant stepper and the convergence studies.
template <class State, class F>
State rk4(const State& x, double dt, F&& f) {
  const State k1 = f(x);
  const State k2 = f(x + 0.5 * dt * k1);
  const State k3 = f(x + 0.5 * dt * k2);
  const State k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Snapshot at t = k dt. x and err describe the state at t; u is the input
// held over [t, t + dt) (the final record repeats the last held input);
// info_count and edge_count come from the most recent controller tick.
struct StepRecord {
  double t = 0.0;
  std::vector<SubsystemState> x;
  std::vector<Vec2d> u;
  std::vector<FlatPoint> ref;
  std::vector<double> err;
  std::vector<int> info_count;
  int edge_count = 0;
};

struct RunSummary {
  double e_pos = 0.0;                  // mean position error over vehicles and time
  std::vector<double> vehicle_e_pos;   // same metric per vehicle
  double max_thrust_deviation = 0.0;   // max |T - mg| over the whole run
  double mean_info_count = 0.0;        // mean |S^i| over vehicles and held intervals
  double wall_seconds = 0.0;
};

struct RunLog {
  ScenarioConfig cfg;
  std::vector<StepRecord> records;  // steps() + 1 entries, records[k] at t = k dt
  RunSummary summary;
};

// Crossing-formation reference for vehicle i (0-based): even indices start on
// the -x side and cross in +x, odd indices the reverse, at distinct constant
// altitudes gap * (n - i) so lower index means higher altitude. Returns
// the flat reference (position, velocity, zero higher derivatives) and a zero
// virtual input.
FlatPoint reference(int i, double t, const ScenarioConfig& cfg);

// Initial joint state per cfg.init: hover levels on the reference, or the
// joint inverse of the reference jets (wake couplings already in the state).
JointState initial_state(const ScenarioConfig& cfg);

// One RK4 step of the physical plant (exact coupling; wake torque per mp)
// under a held input. Throws domain_error naming the vehicle if any stage
// produces a non-finite derivative.
JointState rk4_step(const JointState& x, const ControlInput& u, double dt,
                    const ModelParams& mp);

// Runs the closed loop: every control tick each vehicle measures its flat
// state, applies the tracking law, and inverts through its own information
// set; between ticks the input is held while the plant integrates. Domain
// errors are rethrown with the failing step identified.
RunLog run(const ScenarioConfig& cfg);

struct SweepRow {
  Vec2d threshold;
  double e_pos = 0.0;
  double iqr = 0.0;        // inter-quartile range of vehicle_e_pos
  double mean_info = 0.0;  // mean communication-set size
};

// Runs the base scenario once per threshold, in input order. jobs > 1 runs
// the (independent) simulations concurrently; the output order is unchanged.
std::vector<SweepRow> sweep_threshold(const ScenarioConfig& base,
                                      const std::vector<Vec2d>& thresholds,
                                      int jobs = 1);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> sample, double q);

// Writers are atomic: they stream to path + ".tmp" and rename into place.
// The CSV has one row per record per vehicle with the columns
// t,px,py,vx,vy,T,theta,Tdot,omega,u1,u2,err,S printed via %.17g.
void write_run_csv(const RunLog& log, const std::string& path);
void write_run_summary(const RunLog& log, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace flatswarm
