#include "flatswarm/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "flatswarm/errors.hpp"
#include "flatswarm/flatness.hpp"
#include "flatswarm/graph.hpp"
#include "flatswarm/plant.hpp"

namespace flatswarm {

namespace {

void check_finite(const JointState& s, const char* what) {
  for (std::size_t i = 0; i < s.sub.size(); ++i)
    for (const Vec2d& lv : s.sub[i].level)
      if (!std::isfinite(lv.x) || !std::isfinite(lv.y)) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "vehicle %zu produced a non-finite %s",
                      i, what);
        throw domain_error(msg);
      }
}

void print_g(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

std::string fmt_g(double v) {
  std::string s;
  print_g(s, v);
  return s;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace

FlatPoint reference(int i, double t, const ScenarioConfig& cfg) {
  const double sign = (i % 2 == 0) ? -1.0 : 1.0;
  FlatPoint p;
  p.z[0] = sign * (cfg.speed * cfg.duration / 2.0 - cfg.speed * t);
  p.z[1] = cfg.formation_gap * static_cast<double>(cfg.n - i);
  p.z[2] = -sign * cfg.speed;
  // constant-velocity reference: everything above the velocity stays zero
  return p;
}

JointState initial_state(const ScenarioConfig& cfg) {
  cfg.validate();
  JointState x;
  x.sub.resize(cfg.n);
  if (cfg.init == InitMode::hover) {
    for (int i = 0; i < cfg.n; ++i) {
      const FlatPoint r = reference(i, 0.0, cfg);
      SubsystemState& s = x.sub[i];
      s.level[0] = {r.z[0], r.z[1]};
      s.level[1] = {r.z[2], r.z[3]};
      s.level[2] = {cfg.quad.mass * cfg.quad.gravity, 0.0};
    }
    return x;
  }
  // consistent: invert the reference jets through the physical coupling so
  // the initial derivatives already balance the wakes
  FlatJetBundle bundle;
  for (int i = 0; i < cfg.n; ++i) {
    const FlatPoint r = reference(i, 0.0, cfg);
    bundle.y.push_back(flat_point_jets(r));
    x.sub[i].level[0] = {r.z[0], r.z[1]};
  }
  const CouplingGraph g = build_graph(x, CouplingModel::exact, cfg.threshold);
  return build_joint_diffeo(bundle, CouplingModel::exact, g, cfg.model_params())
      .states;
}

JointState rk4_step(const JointState& x, const ControlInput& u, double dt,
                    const ModelParams& mp) {
  if (dt <= 0.0) throw std::invalid_argument("rk4_step: dt must be positive");
  const auto f = [&](const JointState& s) {
    JointState d = joint_dynamics(s, u, CouplingModel::exact, mp);
    check_finite(d, "state derivative");
    return d;
  };
  JointState next = rk4(x, dt, f);
  check_finite(next, "state");
  return next;
}

RunLog run(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  const ModelParams mp = cfg.model_params();
  const GainSet gains = quadrotor_gains(cfg.q_scale, cfg.r_scale);
  const int n = cfg.n;
  const long long steps = cfg.steps();
  const int per_tick = cfg.steps_per_tick();

  RunLog log;
  log.cfg = cfg;
  log.records.reserve(static_cast<std::size_t>(steps) + 1);

  JointState x = initial_state(cfg);
  std::vector<Vec2d> u(n, Vec2d{0.0, 0.0});
  std::vector<int> info_count(n, 0);
  int edge_count = 0;

  const auto record_at = [&](long long k) {
    StepRecord rec;
    rec.t = static_cast<double>(k) * cfg.dt;
    rec.x.reserve(n);
    rec.u.reserve(n);
    rec.ref.reserve(n);
    rec.err.reserve(n);
    for (int i = 0; i < n; ++i) {
      const FlatPoint ref = reference(i, rec.t, cfg);
      rec.x.push_back(x.sub[i]);
      rec.u.push_back(u[i]);
      rec.err.push_back(
          std::hypot(x.sub[i].pos().x - ref.z[0], x.sub[i].pos().y - ref.z[1]));
      rec.ref.push_back(ref);
    }
    rec.info_count = info_count;
    rec.edge_count = edge_count;
    log.records.push_back(std::move(rec));
  };

  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    try {
      if (k % per_tick == 0) {
        const CouplingGraph g = build_graph(x, cfg.variant, cfg.threshold);
        edge_count = g.edge_count();
        const auto z = forward_flat_states(x, cfg.variant, g, mp);
        std::vector<FlatPoint> points(n);
        for (int i = 0; i < n; ++i) {
          points[i].z = z[i];
          points[i].v =
              tracking_virtual_input(z[i], reference(i, t, cfg), gains.K);
        }
        for (int i = 0; i < n; ++i) {
          const std::vector<int> members = info_set(g, i, 5);
          info_count[i] = static_cast<int>(members.size());
          std::map<int, FlatPoint> gathered;
          for (const int j : members) gathered.emplace(j, points[j]);
          u[i] = distributed_control_step(i, gathered, cfg.variant, g, mp,
                                          x.sub[i].tilt());
        }
      }
      record_at(k);
      x = rk4_step(x, ControlInput{u}, cfg.dt, mp);
    } catch (const error& e) {
      char msg[256];
      std::snprintf(msg, sizeof msg, "step %lld (t = %.6g): %s", k, t, e.what());
      throw domain_error(msg);
    }
  }
  record_at(steps);

  RunSummary& s = log.summary;
  s.vehicle_e_pos.assign(n, 0.0);
  for (long long k = 1; k <= steps; ++k)
    for (int i = 0; i < n; ++i)
      s.vehicle_e_pos[i] += log.records[static_cast<std::size_t>(k)].err[i];
  const double scale = cfg.dt / cfg.duration;
  double total = 0.0;
  for (double& e : s.vehicle_e_pos) {
    e *= scale;
    total += e;
  }
  s.e_pos = total / n;
  for (const StepRecord& rec : log.records)
    for (int i = 0; i < n; ++i)
      s.max_thrust_deviation =
          std::max(s.max_thrust_deviation,
                   std::fabs(rec.x[i].thrust() - cfg.quad.mass * cfg.quad.gravity));
  double info_total = 0.0;
  for (long long k = 0; k < steps; ++k)
    for (int i = 0; i < n; ++i)
      info_total += log.records[static_cast<std::size_t>(k)].info_count[i];
  s.mean_info_count = info_total / (static_cast<double>(steps) * n);
  s.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - clock_start)
                       .count();
  return log;
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty())
    throw std::invalid_argument("quantile needs a nonempty sample");
  q = std::clamp(q, 0.0, 1.0);
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sample.size()) return sample.back();
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

std::vector<SweepRow> sweep_threshold(const ScenarioConfig& base,
                                      const std::vector<Vec2d>& thresholds,
                                      int jobs) {
  if (thresholds.empty())
    throw std::invalid_argument("sweep_threshold needs at least one threshold");
  const auto one = [&base](const Vec2d& th) {
    ScenarioConfig cfg = base;
    cfg.threshold = th;
    const RunLog log = run(cfg);
    SweepRow row;
    row.threshold = th;
    row.e_pos = log.summary.e_pos;
    row.iqr = quantile(log.summary.vehicle_e_pos, 0.75) -
              quantile(log.summary.vehicle_e_pos, 0.25);
    row.mean_info = log.summary.mean_info_count;
    return row;
  };

  std::vector<SweepRow> rows(thresholds.size());
  if (jobs <= 1) {
    for (std::size_t r = 0; r < thresholds.size(); ++r)
      rows[r] = one(thresholds[r]);
    return rows;
  }
  // keep at most `jobs` runs in flight; rows land at their input index
  std::vector<std::future<SweepRow>> pending(thresholds.size());
  std::size_t launched = 0;
  std::size_t done = 0;
  while (done < thresholds.size()) {
    while (launched < thresholds.size() &&
           launched - done < static_cast<std::size_t>(jobs)) {
      pending[launched] =
          std::async(std::launch::async, one, thresholds[launched]);
      ++launched;
    }
    rows[done] = pending[done].get();
    ++done;
  }
  return rows;
}

void write_run_csv(const RunLog& log, const std::string& path) {
  std::string out = "t,px,py,vx,vy,T,theta,Tdot,omega,u1,u2,err,S\n";
  out.reserve(out.size() + log.records.size() * log.cfg.n * 13 * 26);
  for (const StepRecord& rec : log.records)
    for (int i = 0; i < log.cfg.n; ++i) {
      const SubsystemState& s = rec.x[i];
      const double cols[12] = {rec.t,
                               s.pos().x,
                               s.pos().y,
                               s.vel().x,
                               s.vel().y,
                               s.thrust(),
                               s.tilt(),
                               s.thrust_rate(),
                               s.ang_rate(),
                               rec.u[i].x,
                               rec.u[i].y,
                               rec.err[i]};
      for (const double c : cols) {
        print_g(out, c);
        out += ',';
      }
      out += std::to_string(rec.info_count[i]);
      out += '\n';
    }
  atomic_write(path, out);
}

void write_run_summary(const RunLog& log, const std::string& path) {
  const ScenarioConfig& c = log.cfg;
  const RunSummary& s = log.summary;
  std::ostringstream out;
  out << "variant: " << to_string(c.variant) << '\n'
      << "n: " << c.n << '\n'
      << "duration: " << fmt_g(c.duration) << '\n'
      << "speed: " << fmt_g(c.speed) << '\n'
      << "formation_gap: " << fmt_g(c.formation_gap) << '\n'
      << "dt: " << fmt_g(c.dt) << '\n'
      << "control_rate: " << fmt_g(c.control_rate) << '\n'
      << "threshold: " << fmt_g(c.threshold.x) << ',' << fmt_g(c.threshold.y)
      << '\n'
      << "torque_coupling: " << (c.torque_coupling ? "true" : "false") << '\n'
      << "init: " << to_string(c.init) << '\n'
      << "q_scale: " << fmt_g(c.q_scale) << '\n'
      << "r_scale: " << fmt_g(c.r_scale) << '\n'
      << "seed: " << c.seed << '\n'
      << "steps: " << c.steps() << '\n'
      << "e_pos: " << fmt_g(s.e_pos) << '\n';
  for (std::size_t i = 0; i < s.vehicle_e_pos.size(); ++i)
    out << "e_pos_vehicle_" << i << ": " << fmt_g(s.vehicle_e_pos[i]) << '\n';
  out << "max_thrust_deviation: " << fmt_g(s.max_thrust_deviation) << '\n'
      << "mean_info_count: " << fmt_g(s.mean_info_count) << '\n'
      << "wall_seconds: " << fmt_g(s.wall_seconds) << '\n';
  atomic_write(path, out.str());
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::string out = "threshold_x,threshold_y,e_pos,iqr,mean_info\n";
  for (const SweepRow& row : rows) {
    const double cols[5] = {row.threshold.x, row.threshold.y, row.e_pos, row.iqr,
                            row.mean_info};
    for (int c = 0; c < 5; ++c) {
      print_g(out, cols[c]);
      out += c + 1 < 5 ? ',' : '\n';
    }
  }
  atomic_write(path, out);
}

}  // namespace flatswarm
