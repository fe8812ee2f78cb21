// Command-line front end: closed-loop runs, threshold sweeps, an embedded
// property-verification suite, and regeneration of the numeric reference
// fixtures consumed by the tests.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flatswarm/config.hpp"
#include "flatswarm/control.hpp"
#include "flatswarm/downwash.hpp"
#include "flatswarm/errors.hpp"
#include "flatswarm/flatness.hpp"
#include "flatswarm/graph.hpp"
#include "flatswarm/plant.hpp"
#include "flatswarm/sim.hpp"
#include "oracle_helpers.hpp"

namespace {

struct CommonOpts {
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_out) {
  cmd->add_option("--preset", o.preset, "named experiment preset");
  cmd->add_option("--config", o.config_file, "flat key=value config file");
  cmd->add_option("--set", o.overrides, "key=value override, repeatable");
  if (with_out) cmd->add_option("--out", o.out_dir, "output directory");
}

// preset, then config file, then individual overrides; validation is skipped
// for verify so deliberately degenerate configs reach the property checks
flatswarm::ScenarioConfig assemble(const CommonOpts& o, bool validate) {
  flatswarm::ScenarioConfig cfg;
  if (!o.preset.empty()) cfg = flatswarm::scenario_preset(o.preset);
  if (!o.config_file.empty())
    cfg = flatswarm::parse_config_file(o.config_file, cfg);
  for (const std::string& kv : o.overrides) flatswarm::apply_override(cfg, kv);
  if (validate) cfg.validate();
  return cfg;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

int cmd_run(const CommonOpts& o) {
  const flatswarm::ScenarioConfig cfg = assemble(o, true);
  const flatswarm::RunLog log = flatswarm::run(cfg);
  std::filesystem::create_directories(o.out_dir);
  flatswarm::write_run_csv(log, o.out_dir + "/run.csv");
  flatswarm::write_run_summary(log, o.out_dir + "/summary.txt");
  std::cout << "variant " << flatswarm::to_string(cfg.variant) << ", " << cfg.n
            << " vehicles, " << cfg.steps() << " steps\n"
            << "e_pos " << fmt_short(log.summary.e_pos) << "\n"
            << "max thrust deviation "
            << fmt_short(log.summary.max_thrust_deviation) << "\n"
            << "wall " << fmt_short(log.summary.wall_seconds) << " s\n"
            << "wrote " << o.out_dir << "/run.csv and " << o.out_dir
            << "/summary.txt\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::vector<double>& deltas, int jobs) {
  const flatswarm::ScenarioConfig cfg = assemble(o, true);
  if (deltas.empty()) throw flatswarm::config_error("empty threshold list");
  std::vector<flatswarm::Vec2d> boxes;
  boxes.reserve(deltas.size());
  for (const double d : deltas) {
    if (d < 0.0) throw flatswarm::config_error("thresholds must be non-negative");
    boxes.push_back({d, d});
  }
  const auto rows = flatswarm::sweep_threshold(cfg, boxes, jobs);
  std::filesystem::create_directories(o.out_dir);
  flatswarm::write_sweep_csv(rows, o.out_dir + "/sweep.csv");
  std::cout << "threshold   e_pos        iqr          mean|S|\n";
  for (const auto& row : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-11.4g %-12.6g %-12.6g %.4g\n",
                  row.threshold.x, row.e_pos, row.iqr, row.mean_info);
    std::cout << line;
  }
  std::cout << "wrote " << o.out_dir << "/sweep.csv\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify: self-contained property suite

struct Property {
  std::string name;
  bool pass = false;
  std::string detail;
};

void check_property(std::vector<Property>& out, std::string name,
                    const std::function<std::string()>& body) {
  Property p;
  p.name = std::move(name);
  try {
    p.detail = body();
    p.pass = true;
  } catch (const std::exception& e) {
    p.detail = e.what();
  }
  out.push_back(std::move(p));
}

flatswarm::JointState formation(const flatswarm::ScenarioConfig& cfg) {
  flatswarm::JointState x;
  x.sub.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const flatswarm::FlatPoint r = flatswarm::reference(i, 0.0, cfg);
    x.sub[i].level[0] = {r.z[0], r.z[1]};
    x.sub[i].level[1] = {r.z[2], r.z[3]};
    x.sub[i].level[2] = {cfg.quad.mass * cfg.quad.gravity, 0.0};
  }
  return x;
}

// reference jets with a deterministic wiggle in the higher coefficients so
// couplings, inputs, and the inverse maps are all exercised
flatswarm::FlatJetBundle verification_bundle(const flatswarm::ScenarioConfig& cfg) {
  flatswarm::FlatJetBundle b;
  for (int i = 0; i < cfg.n; ++i) {
    flatswarm::Vec2<flatswarm::Jet> y =
        flatswarm::flat_point_jets(flatswarm::reference(i, 0.0, cfg));
    y.x = y.x + flatswarm::Jet{0.0, 0.03 * (i + 1), 0.05, -0.02, 0.01};
    y.y = y.y + flatswarm::Jet{0.0, 0.02 * (i + 1), -0.04, 0.015, 0.02};
    b.y.push_back(y);
  }
  return b;
}

long double drag_density(long double l, long double dx, long double dy,
                         long double t, const flatswarm::DownwashParams& p) {
  const long double c3 =
      0.5L * static_cast<long double>(p.rho) * static_cast<long double>(p.cd) *
      static_cast<long double>(p.c1) * static_cast<long double>(p.c1);
  const long double k = 2.0L * static_cast<long double>(p.c2) / (dy * dy);
  const long double s = dx + l;
  const long double span = static_cast<long double>(p.span);
  return c3 * t * span * span / (dy * dy) * std::exp(-k * s * s);
}

bool same_subsystem(const flatswarm::SubsystemState& a,
                    const flatswarm::SubsystemState& b) {
  for (int k = 0; k < 4; ++k)
    if (!(a.level[k] == b.level[k])) return false;
  return true;
}

int cmd_verify(const CommonOpts& o) {
  const flatswarm::ScenarioConfig cfg = assemble(o, false);
  const flatswarm::ModelParams mp = cfg.model_params();
  std::vector<Property> props;

  check_property(props, "regularity", [&] {
    const auto rep = flatswarm::regularity_check(formation(cfg), mp);
    if (!rep.ok()) {
      std::ostringstream msg;
      msg << "invertibility margin below " << rep.threshold << " at";
      for (const auto& [veh, lvl] : rep.flagged)
        msg << " (vehicle " << veh << ", level " << lvl << ")";
      throw std::runtime_error(msg.str());
    }
    return "min invertibility margin " + fmt_short(rep.min_det);
  });

  check_property(props, "coupling-order", [&] {
    const auto g = flatswarm::build_graph(
        formation(cfg), flatswarm::CouplingModel::exact, cfg.threshold);
    if (!g.lower_triangular())
      throw std::runtime_error("exact edges violate the index order");
    return "exact graph has " + std::to_string(g.edge_count()) +
           " edges, index-ordered";
  });

  check_property(props, "diffeo-round-trip", [&] {
    const auto bundle = verification_bundle(cfg);
    const auto g = flatswarm::build_graph(
        formation(cfg), flatswarm::CouplingModel::exact, cfg.threshold);
    const auto out =
        flatswarm::build_joint_diffeo(bundle, flatswarm::CouplingModel::exact,
                                      g, mp);
    const auto z = flatswarm::forward_flat_states(
        out.states, flatswarm::CouplingModel::exact, g, mp);
    double worst = 0.0;
    for (int i = 0; i < cfg.n; ++i)
      for (int q = 0; q < 4; ++q) {
        worst = std::max(
            worst, std::fabs(z[i][2 * q] - bundle.y[i].x.derivative(q)));
        worst = std::max(
            worst, std::fabs(z[i][2 * q + 1] - bundle.y[i].y.derivative(q)));
      }
    if (worst > 1e-9)
      throw std::runtime_error("round-trip deviation " + fmt_short(worst) +
                               " exceeds 1e-9");
    return "max round-trip deviation " + fmt_short(worst);
  });

  check_property(props, "sparsity-bitwise", [&] {
    const auto bundle = verification_bundle(cfg);
    int checked = 0;
    for (const auto model : {flatswarm::CouplingModel::exact,
                             flatswarm::CouplingModel::approximate}) {
      const auto g = flatswarm::build_graph(formation(cfg), model, cfg.threshold);
      const auto full = flatswarm::build_joint_diffeo(bundle, model, g, mp);
      for (int i = 0; i < cfg.n; ++i) {
        flatswarm::PartialBundle part;
        for (const int j : flatswarm::info_set(g, i, 5))
          part.y.emplace(j, bundle.y[j]);
        const auto ev = flatswarm::evaluate_vehicle(i, part, model, g, mp);
        if (!(ev.input == full.inputs.u[i]) ||
            !same_subsystem(ev.state, full.states.sub[i])) {
          throw std::runtime_error(
              "restricted evaluation differs for vehicle " + std::to_string(i) +
              " under the " + flatswarm::to_string(model) + " model");
        }
        ++checked;
      }
    }
    return std::to_string(checked) + " restricted evaluations bit-identical";
  });

  check_property(props, "wake-quadrature", [&] {
    const auto& dw = cfg.downwash;
    const long double half = 0.5L * static_cast<long double>(dw.span);
    const double spots[4][3] = {
        {0.0, 1.0, 9.81}, {0.2, 1.0, 9.81}, {-0.4, 1.7, 14.0}, {0.75, 2.5, 6.0}};
    double worst = 0.0;
    for (const auto& s : spots) {
      const long double dx = s[0], dy = s[1], t = s[2];
      const long double fq = -oracle::integrate(
          [&](long double l) { return drag_density(l, dx, dy, t, dw); }, -half,
          half, 1e-18L);
      const long double tq = -oracle::integrate(
          [&](long double l) { return l * drag_density(l, dx, dy, t, dw); },
          -half, half, 1e-19L);
      const double fc =
          flatswarm::drag_force({s[0], s[1]}, s[2], dw);
      const double tc =
          flatswarm::drag_torque({s[0], s[1]}, s[2], dw);
      worst = std::max(worst, std::fabs(fc - static_cast<double>(fq)) /
                                  std::fabs(static_cast<double>(fq)));
      worst = std::max(worst,
                       std::fabs(tc - static_cast<double>(tq)) /
                           std::max(std::fabs(static_cast<double>(tq)), 1e-12));
    }
    if (worst > 1e-9)
      throw std::runtime_error("closed form deviates from quadrature by " +
                               fmt_short(worst));
    return "max closed-form deviation " + fmt_short(worst);
  });

  check_property(props, "gain-synthesis", [&] {
    const auto g = flatswarm::quadrotor_gains(cfg.q_scale, cfg.r_scale);
    const Eigen::MatrixXd q = cfg.q_scale * Eigen::MatrixXd::Identity(8, 8);
    const Eigen::MatrixXd res = g.A.transpose() * g.P + g.P * g.A -
                                g.P * g.B * g.B.transpose() * g.P / cfg.r_scale +
                                q;
    const double abscissa = Eigen::EigenSolver<Eigen::MatrixXd>(
                                g.A - g.B * g.K, false)
                                .eigenvalues()
                                .real()
                                .maxCoeff();
    if (res.norm() > 1e-9)
      throw std::runtime_error("Riccati residual " + fmt_short(res.norm()));
    if (abscissa >= 0.0)
      throw std::runtime_error("closed loop is not Hurwitz, abscissa " +
                               fmt_short(abscissa));
    return "Riccati residual " + fmt_short(res.norm()) +
           ", closed-loop abscissa " + fmt_short(abscissa);
  });

  bool all = true;
  int passed = 0;
  for (const Property& p : props) {
    all = all && p.pass;
    passed += p.pass ? 1 : 0;
    std::cout << (p.pass ? "PASS " : "FAIL ") << p.name << ": " << p.detail
              << '\n';
  }
  std::cout << "verify: " << passed << "/" << props.size()
            << " properties passed\n";
  return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// oracle: regenerate the numeric reference fixtures consumed by the tests

void write_downwash_fixture(const std::string& path) {
  const flatswarm::DownwashParams dw{};
  const long double half = 0.5L * static_cast<long double>(dw.span);
  std::string out = "dx,dy,thrust,wind,force,torque\n";
  for (const double dx : {-1.5, -0.75, -0.2, 0.0, 0.2, 0.75, 1.5})
    for (const double dy : {0.4, 0.7, 1.0, 1.6, 2.5, 4.0})
      for (const double t : {4.905, 9.81, 14.715}) {
        const long double wind =
            static_cast<long double>(dw.c1) * std::sqrt((long double)t) *
            static_cast<long double>(dw.span) / (long double)dy *
            std::exp(-static_cast<long double>(dw.c2) *
                     ((long double)dx / dy) * ((long double)dx / dy));
        const long double force = -oracle::integrate(
            [&](long double l) {
              return drag_density(l, dx, dy, t, dw);
            },
            -half, half, 1e-18L);
        const long double torque = -oracle::integrate(
            [&](long double l) {
              return l * drag_density(l, dx, dy, t, dw);
            },
            -half, half, 1e-19L);
        out += fmt_g(dx) + ',' + fmt_g(dy) + ',' + fmt_g(t) + ',' +
               fmt_g(static_cast<double>(wind)) + ',' +
               fmt_g(static_cast<double>(force)) + ',' +
               fmt_g(static_cast<double>(torque)) + '\n';
      }
  atomic_write(path, out);
}

// stabilizing Riccati solution through the Hamiltonian stable subspace, a
// route entirely separate from the iteration inside the library
Eigen::MatrixXd hamiltonian_care(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b, double q_scale,
                                 double r_scale) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = -b * b.transpose() / r_scale;
  h.bottomLeftCorner(n, n) =
      -q_scale * Eigen::MatrixXd::Identity(n, n);
  h.bottomRightCorner(n, n) = -a.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(h);
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < 2 * n && col < n; ++k)
    if (es.eigenvalues()(k).real() < 0.0) basis.col(col++) = es.eigenvectors().col(k);
  if (col != n) throw std::runtime_error("Hamiltonian stable subspace is deficient");
  const Eigen::MatrixXcd x = basis.topRows(n);
  const Eigen::MatrixXcd y = basis.bottomRows(n);
  const Eigen::MatrixXd p = (y * x.fullPivLu().inverse()).real();
  return 0.5 * (p + p.transpose());
}

void write_care_fixture(const std::string& path) {
  const flatswarm::BrunovskyPair pair = flatswarm::brunovsky_pair(4, 2);
  std::string out = "q,r";
  for (int k = 0; k < 16; ++k) out += ",k" + std::to_string(k);
  for (int k = 0; k < 64; ++k) out += ",p" + std::to_string(k);
  out += '\n';
  const double grid[5][2] = {{1, 1}, {4, 1}, {100, 1}, {100, 0.5}, {25, 2}};
  for (const auto& qr : grid) {
    const Eigen::MatrixXd p = hamiltonian_care(pair.A, pair.B, qr[0], qr[1]);
    const Eigen::MatrixXd k = pair.B.transpose() * p / qr[1];
    out += fmt_g(qr[0]) + ',' + fmt_g(qr[1]);
    for (int r = 0; r < k.rows(); ++r)
      for (int c = 0; c < k.cols(); ++c) out += ',' + fmt_g(k(r, c));
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c) out += ',' + fmt_g(p(r, c));
    out += '\n';
  }
  atomic_write(path, out);
}

void write_reachability_fixture(const std::string& path) {
  // frozen six-vehicle formation with distinct altitudes and mixed offsets
  const double pos[6][2] = {{0.0, 3.0},  {0.1, 2.4}, {-0.3, 1.9},
                            {0.05, 1.1}, {0.4, 0.5}, {-0.2, 0.0}};
  const int n = 6;
  const double boxes[2][2] = {{0.5, 1.0}, {0.6, 2.5}};

  std::string out;
  for (int i = 0; i < n; ++i)
    out += "pos," + std::to_string(i) + ',' + fmt_g(pos[i][0]) + ',' +
           fmt_g(pos[i][1]) + '\n';

  const auto edges_for = [&](const std::string& model, double tx, double ty) {
    // in[i] lists j whose wake reaches i: j strictly above, and inside the
    // open displacement box for the approximate model
    std::vector<std::vector<bool>> in(n, std::vector<bool>(n, false));
    if (model == "nominal") return in;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = pos[j][0] - pos[i][0];
        const double dy = pos[j][1] - pos[i][1];
        if (dy <= 0.0) continue;
        if (model == "approximate" && !(std::fabs(dx) < tx && dy < ty)) continue;
        in[i][j] = true;
      }
    return in;
  };

  for (const std::string model : {"nominal", "exact", "approximate"})
    for (const auto& box : boxes) {
      const auto in = edges_for(model, box[0], box[1]);
      for (int i = 0; i < n; ++i)
        for (const int k : {1, 2, 3, 5}) {
          // members reachable along in-edges in fewer than k hops; the exact
          // model closes transitively regardless of k beyond the first hop
          std::vector<bool> seen(n, false);
          seen[i] = true;
          const int hops = (model == "exact") ? n : k - 1;
          std::vector<int> frontier{i};
          for (int h = 0; h < hops && !frontier.empty(); ++h) {
            std::vector<int> next;
            for (const int v : frontier)
              for (int j = 0; j < n; ++j)
                if (in[v][j] && !seen[j]) {
                  seen[j] = true;
                  next.push_back(j);
                }
            frontier = std::move(next);
          }
          std::string members;
          for (int j = 0; j < n; ++j)
            if (seen[j]) {
              if (!members.empty()) members += ';';
              members += std::to_string(j);
            }
          out += "set," + model + ',' + fmt_g(box[0]) + ',' + fmt_g(box[1]) +
                 ',' + std::to_string(i) + ',' + std::to_string(k) + ',' +
                 members + '\n';
        }
    }
  atomic_write(path, out);
}

int cmd_oracle(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_downwash_fixture(out_dir + "/downwash_reference.csv");
  write_care_fixture(out_dir + "/care_reference.csv");
  write_reachability_fixture(out_dir + "/reachability_reference.csv");
  std::cout << "wrote downwash_reference.csv, care_reference.csv, "
               "reachability_reference.csv under "
            << out_dir << '\n';
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const flatswarm::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const flatswarm::error& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic multi-vehicle flatness simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate one closed-loop scenario");
  add_common(run_cmd, run_opts, true);

  CommonOpts sweep_opts;
  std::vector<double> deltas{0.25, 0.5, 1.0, 1.5, 2.0, 2.5};
  int jobs = 1;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a cutoff-threshold sweep");
  add_common(sweep_cmd, sweep_opts, true);
  sweep_cmd->add_option("--thresholds", deltas,
                        "cutoff values, each used as a square box")
      ->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "concurrent simulations");

  CommonOpts verify_opts;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the embedded property suite");
  add_common(verify_cmd, verify_opts, false);

  std::string oracle_out = "tests/fixtures";
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "regenerate the numeric reference fixtures");
  oracle_cmd->add_option("--out", oracle_out, "fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) return guarded([&] { return cmd_run(run_opts); });
  if (sweep_cmd->parsed())
    return guarded([&] { return cmd_sweep(sweep_opts, deltas, jobs); });
  if (verify_cmd->parsed()) return guarded([&] { return cmd_verify(verify_opts); });
  return guarded([&] { return cmd_oracle(oracle_out); });
}
