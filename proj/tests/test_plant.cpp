#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "flatswarm/downwash.hpp"
#include "flatswarm/errors.hpp"
#include "flatswarm/plant.hpp"
#include "oracle_helpers.hpp"

using flatswarm::ControlInput;
using flatswarm::CouplingModel;
using flatswarm::JointState;
using flatswarm::ModelParams;
using flatswarm::SubsystemState;
using flatswarm::Vec2d;

namespace {

const ModelParams kMP{};

SubsystemState hover_at(const Vec2d& p) {
  SubsystemState s;
  s.level[0] = p;
  s.level[2] = {kMP.quad.mass * kMP.quad.gravity, 0.0};
  return s;
}

JointState random_joint(oracle::Rng& rng, int n) {
  JointState x;
  x.sub.resize(n);
  for (int i = 0; i < n; ++i) {
    x.sub[i].level[0] = {rng.uniform(-2.0, 2.0), rng.uniform(0.0, 4.0)};
    x.sub[i].level[1] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    x.sub[i].level[2] = {rng.uniform(5.0, 15.0), rng.uniform(-0.6, 0.6)};
    x.sub[i].level[3] = {rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0)};
  }
  return x;
}

ControlInput random_input(oracle::Rng& rng, int n) {
  ControlInput u;
  u.u.resize(n);
  for (int i = 0; i < n; ++i) u.u[i] = {rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 1.0)};
  return u;
}

JointState rk4(const JointState& x, const ControlInput& u, double dt,
               CouplingModel model, const ModelParams& mp) {
  const JointState k1 = flatswarm::joint_dynamics(x, u, model, mp);
  const JointState k2 = flatswarm::joint_dynamics(x + (0.5 * dt) * k1, u, model, mp);
  const JointState k3 = flatswarm::joint_dynamics(x + (0.5 * dt) * k2, u, model, mp);
  const JointState k4 = flatswarm::joint_dynamics(x + dt * k3, u, model, mp);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

TEST_CASE("uncoupled level dynamics hand values") {
  const auto& qp = kMP.quad;
  // hover equilibrium
  const Vec2d a0 = flatswarm::uncoupled_level_dynamics(2, {qp.mass * qp.gravity, 0.0}, qp);
  CHECK(a0.x == 0.0);
  CHECK(a0.y == 0.0);
  // sideways thrust
  const Vec2d a1 =
      flatswarm::uncoupled_level_dynamics(2, {qp.mass * qp.gravity, M_PI / 2}, qp);
  CHECK(a1.x == doctest::Approx(-qp.gravity).epsilon(1e-15));
  CHECK(a1.y == doctest::Approx(-qp.gravity).epsilon(1e-14));
  // pass-through levels
  CHECK(flatswarm::uncoupled_level_dynamics(1, {2.0, 3.0}, qp).x == 2.0);
  CHECK(flatswarm::uncoupled_level_dynamics(3, {-1.0, 0.5}, qp).y == 0.5);
  // input map scales torque by 1/I
  const Vec2d a4 = flatswarm::uncoupled_level_dynamics(4, {1.5, 0.3}, qp);
  CHECK(a4.x == 1.5);
  CHECK(a4.y == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(flatswarm::uncoupled_level_dynamics(5, {0, 0}, qp),
                  std::invalid_argument);
}

TEST_CASE("level-2 dynamics matches the slope of an integrated trajectory") {
  JointState x;
  x.sub.push_back(hover_at({0.0, 1.0}));
  ControlInput u;
  u.u.push_back({0.4, 0.05});
  const double dt = 1e-4;
  std::vector<JointState> traj{x};
  for (int s = 0; s < 400; ++s) traj.push_back(rk4(traj.back(), u, dt, CouplingModel::nominal, kMP));
  for (int s = 50; s < 350; s += 25) {
    const Vec2d dv = (1.0 / (2 * dt)) * (traj[s + 1].sub[0].vel() - traj[s - 1].sub[0].vel());
    const Vec2d want = flatswarm::thrust_accel(
        Vec2d{traj[s].sub[0].thrust(), traj[s].sub[0].tilt()}, kMP.quad);
    CHECK(dv.x == doctest::Approx(want.x).epsilon(1e-6));
    CHECK(dv.y == doctest::Approx(want.y).epsilon(1e-6));
  }
}

TEST_CASE("nominal joint dynamics is the block concatenation of the chains") {
  oracle::Rng rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = rng.integer(1, 6);
    const JointState x = random_joint(rng, n);
    const ControlInput u = random_input(rng, n);
    const JointState dx = flatswarm::joint_dynamics(x, u, CouplingModel::nominal, kMP);
    for (int i = 0; i < n; ++i) {
      CHECK(dx.sub[i].level[0] == x.sub[i].level[1]);
      const Vec2d a = flatswarm::thrust_accel(
          Vec2d{x.sub[i].thrust(), x.sub[i].tilt()}, kMP.quad);
      CHECK(dx.sub[i].level[1] == a);
      CHECK(dx.sub[i].level[2] == x.sub[i].level[3]);
      CHECK(dx.sub[i].level[3].x == u.u[i].x);
      CHECK(dx.sub[i].level[3].y == u.u[i].y / kMP.quad.inertia);
    }
  }
}

TEST_CASE("two stacked hovering quads feel exactly the pairwise wake force") {
  JointState x;
  x.sub.push_back(hover_at({0.0, 2.0}));  // upper
  x.sub.push_back(hover_at({0.0, 1.0}));  // lower
  ControlInput u;
  u.u.assign(2, {0.0, 0.0});
  const JointState dx = flatswarm::joint_dynamics(x, u, CouplingModel::exact, kMP);

  const double fd = flatswarm::drag_force(Vec2d{0.0, 1.0},
                                          kMP.quad.mass * kMP.quad.gravity,
                                          kMP.downwash);
  // upper vehicle undisturbed, lower one accelerates down by F_D / m
  CHECK(dx.sub[0].level[1].x == 0.0);
  CHECK(dx.sub[0].level[1].y == 0.0);
  CHECK(dx.sub[1].level[1].y == fd / kMP.quad.mass);
  CHECK(fd < 0.0);
}

TEST_CASE("coupling superposes pairwise and distinguishes the models") {
  oracle::Rng rng(52);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = rng.integer(2, 6);
    const JointState x = random_joint(rng, n);
    const ControlInput u = random_input(rng, n);
    const auto nom = flatswarm::joint_dynamics(x, u, CouplingModel::nominal, kMP);
    const auto exa = flatswarm::joint_dynamics(x, u, CouplingModel::exact, kMP);
    const auto app = flatswarm::joint_dynamics(x, u, CouplingModel::approximate, kMP);

    const auto ge = flatswarm::build_graph(x, CouplingModel::exact, kMP.threshold);
    const auto ga = flatswarm::build_graph(x, CouplingModel::approximate, kMP.threshold);
    for (int i = 0; i < n; ++i) {
      double fe = 0.0, fa = 0.0;
      for (int j : ge.in[i])
        fe += flatswarm::drag_force(x.sub[j].pos() - x.sub[i].pos(),
                                    x.sub[j].thrust(), kMP.downwash);
      for (int j : ga.in[i])
        fa += flatswarm::approx_drag_force(x.sub[j].pos() - x.sub[i].pos(),
                                           kMP.downwash, kMP.quad);
      CHECK(exa.sub[i].level[1].y == nom.sub[i].level[1].y + fe / kMP.quad.mass);
      CHECK(app.sub[i].level[1].y == nom.sub[i].level[1].y + fa / kMP.quad.mass);
      // x-acceleration and the other levels never feel the wake
      CHECK(exa.sub[i].level[1].x == nom.sub[i].level[1].x);
      CHECK(exa.sub[i].level[0] == nom.sub[i].level[0]);
      CHECK(exa.sub[i].level[2] == nom.sub[i].level[2]);
      CHECK(exa.sub[i].level[3] == nom.sub[i].level[3]);
    }
  }
}

TEST_CASE("torque coupling obeys its flag and only the exact model") {
  ModelParams mp;
  mp.torque_coupling = true;
  JointState x;
  x.sub.push_back(hover_at({0.2, 2.0}));
  x.sub.push_back(hover_at({0.0, 1.0}));
  ControlInput u;
  u.u.assign(2, {0.5, 0.1});

  const auto off = flatswarm::joint_dynamics(x, u, CouplingModel::exact, kMP);
  const auto on = flatswarm::joint_dynamics(x, u, CouplingModel::exact, mp);
  const auto apx = flatswarm::joint_dynamics(x, u, CouplingModel::approximate, mp);

  const double tq = flatswarm::drag_torque(Vec2d{0.2, 1.0},
                                           mp.quad.mass * mp.quad.gravity,
                                           mp.downwash);
  CHECK(off.sub[1].level[3].y == u.u[1].y / mp.quad.inertia);
  CHECK(on.sub[1].level[3].y ==
        u.u[1].y / mp.quad.inertia + tq / mp.quad.inertia);
  CHECK(apx.sub[1].level[3].y == u.u[1].y / mp.quad.inertia);
  // wake force itself identical with and without the torque flag
  CHECK(on.sub[1].level[1].y == off.sub[1].level[1].y);
}

TEST_CASE("foreign-state Jacobian entries vanish where the structure says so") {
  oracle::Rng rng(53);
  const JointState x = random_joint(rng, 4);
  const ControlInput u = random_input(rng, 4);
  const double h = 1e-5;

  for (int j = 0; j < 4; ++j) {
    for (int lvl = 0; lvl < 4; ++lvl) {
      for (int c = 0; c < 2; ++c) {
        JointState xp = x, xm = x;
        auto& cp = c == 0 ? xp.sub[j].level[lvl].x : xp.sub[j].level[lvl].y;
        auto& cm = c == 0 ? xm.sub[j].level[lvl].x : xm.sub[j].level[lvl].y;
        cp += h;
        cm -= h;
        const auto dp = flatswarm::joint_dynamics(xp, u, CouplingModel::nominal, kMP);
        const auto dm = flatswarm::joint_dynamics(xm, u, CouplingModel::nominal, kMP);
        for (int i = 0; i < 4; ++i) {
          if (i == j) continue;
          for (int l2 = 0; l2 < 4; ++l2) {
            CHECK(dp.sub[i].level[l2] == dm.sub[i].level[l2]);
          }
        }
      }
    }
  }

  // exact model: foreign influence confined to the vertical acceleration
  const auto base = flatswarm::joint_dynamics(x, u, CouplingModel::exact, kMP);
  for (int j = 0; j < 4; ++j) {
    JointState xp = x;
    xp.sub[j].level[2].x += 0.5;  // bump a thrust
    const auto dp = flatswarm::joint_dynamics(xp, u, CouplingModel::exact, kMP);
    for (int i = 0; i < 4; ++i) {
      if (i == j) continue;
      CHECK(dp.sub[i].level[0] == base.sub[i].level[0]);
      CHECK(dp.sub[i].level[1].x == base.sub[i].level[1].x);
      CHECK(dp.sub[i].level[2] == base.sub[i].level[2]);
      CHECK(dp.sub[i].level[3] == base.sub[i].level[3]);
    }
  }
}

TEST_CASE("regularity report matches the symbolic determinants") {
  JointState x;
  x.sub.push_back(hover_at({0.0, 1.0}));
  const auto rep = flatswarm::regularity_check(x, kMP);
  CHECK(rep.dets[0][0] == 1.0);
  CHECK(rep.dets[0][1] == doctest::Approx(9.81).epsilon(1e-15));
  CHECK(rep.dets[0][2] == 1.0);
  CHECK(rep.dets[0][3] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(rep.ok());
  CHECK(rep.min_det == 1.0);
  CHECK(rep.joint_product == doctest::Approx(98.1).epsilon(1e-14));

  // a vanishing thrust gets flagged
  x.sub[0].level[2].x = 1e-12;
  const auto bad = flatswarm::regularity_check(x, kMP);
  CHECK_FALSE(bad.ok());
  CHECK(bad.flagged.size() == 1);
  CHECK(bad.flagged[0] == std::pair<int, int>{0, 2});
}

TEST_CASE("per-level joint Jacobian determinants equal the analytic product") {
  // central finite differences of the full joint level map, including the
  // coupling terms, factored through a dense LU determinant
  oracle::Rng rng(54);
  ModelParams mp;
  mp.torque_coupling = true;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = rng.integer(2, 4);
    const JointState x = random_joint(rng, n);
    const ControlInput u = random_input(rng, n);
    const double h = 1e-6;

    // level 2: joint acceleration map w.r.t. all thrust/tilt pairs
    Eigen::MatrixXd j2(2 * n, 2 * n);
    for (int jcol = 0; jcol < 2 * n; ++jcol) {
      JointState xp = x, xm = x;
      auto& vp = jcol % 2 == 0 ? xp.sub[jcol / 2].level[2].x : xp.sub[jcol / 2].level[2].y;
      auto& vm = jcol % 2 == 0 ? xm.sub[jcol / 2].level[2].x : xm.sub[jcol / 2].level[2].y;
      vp += h;
      vm -= h;
      const auto dp = flatswarm::joint_dynamics(xp, u, CouplingModel::exact, mp);
      const auto dm = flatswarm::joint_dynamics(xm, u, CouplingModel::exact, mp);
      for (int i = 0; i < n; ++i) {
        j2(2 * i, jcol) = (dp.sub[i].level[1].x - dm.sub[i].level[1].x) / (2 * h);
        j2(2 * i + 1, jcol) = (dp.sub[i].level[1].y - dm.sub[i].level[1].y) / (2 * h);
      }
    }
    double want2 = 1.0;
    for (int i = 0; i < n; ++i)
      want2 *= x.sub[i].thrust() / (mp.quad.mass * mp.quad.mass);
    CHECK(std::fabs(j2.determinant() - want2) <= 1e-8 * std::fabs(want2));

    // level 4: joint input map w.r.t. all raw inputs
    Eigen::MatrixXd j4(2 * n, 2 * n);
    for (int jcol = 0; jcol < 2 * n; ++jcol) {
      ControlInput up = u, um = u;
      auto& vp = jcol % 2 == 0 ? up.u[jcol / 2].x : up.u[jcol / 2].y;
      auto& vm = jcol % 2 == 0 ? um.u[jcol / 2].x : um.u[jcol / 2].y;
      vp += h;
      vm -= h;
      const auto dp = flatswarm::joint_dynamics(x, up, CouplingModel::exact, mp);
      const auto dm = flatswarm::joint_dynamics(x, um, CouplingModel::exact, mp);
      for (int i = 0; i < n; ++i) {
        j4(2 * i, jcol) = (dp.sub[i].level[3].x - dm.sub[i].level[3].x) / (2 * h);
        j4(2 * i + 1, jcol) = (dp.sub[i].level[3].y - dm.sub[i].level[3].y) / (2 * h);
      }
    }
    const double want4 = std::pow(1.0 / mp.quad.inertia, n);
    CHECK(std::fabs(j4.determinant() - want4) <= 1e-8 * std::fabs(want4));
  }
}

TEST_CASE("plant propagates ordering ambiguity and rejects bad input sizes") {
  JointState x;
  x.sub.push_back(hover_at({0.0, 1.0}));
  x.sub.push_back(hover_at({1.0, 1.0}));
  ControlInput u;
  u.u.assign(2, {0.0, 0.0});
  CHECK_THROWS_AS(flatswarm::joint_dynamics(x, u, CouplingModel::exact, kMP),
                  flatswarm::ordering_error);
  CHECK_NOTHROW(flatswarm::joint_dynamics(x, u, CouplingModel::nominal, kMP));

  ControlInput bad;
  bad.u.assign(1, {0.0, 0.0});
  CHECK_THROWS_AS(flatswarm::joint_dynamics(x, bad, CouplingModel::nominal, kMP),
                  std::invalid_argument);
}
