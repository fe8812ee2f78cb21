#include "flatswarm/flatness.hpp"

#include <cstdio>
#include <string>
#include <utility>

namespace flatswarm {
namespace {

constexpr int kRows = 5;  // chain levels 1..4 plus the input row

// One vehicle's share of the evaluation: source jets, how deep its chain is
// needed, and the rows produced so far (row k lands at index k-1).
struct Row {
  const Vec2<Jet>* src = nullptr;
  int depth = 0;
  std::vector<Vec2<Jet>> rows;
};

// Depth each vehicle's chain must reach so that vehicle i reaches `top`.
// Coupling enters at row 3 (and row 5 for torque, which reuses the same
// neighbor data), so any vehicle evaluated to row 3 or beyond pulls its
// in-neighbors' positions (row 1) and, under the exact model, their thrusts
// (row 3), which recurses through the ancestor closure.
std::vector<int> needed_depths(int i, int top, const CouplingGraph& g,
                               CouplingModel model) {
  std::vector<int> depth(static_cast<std::size_t>(g.n), 0);
  depth[static_cast<std::size_t>(i)] = top;
  if (model == CouplingModel::nominal) return depth;
  const int want = model == CouplingModel::exact ? 3 : 1;
  std::vector<int> pending;
  if (top >= 3) pending.push_back(i);
  while (!pending.empty()) {
    const int v = pending.back();
    pending.pop_back();
    for (int j : g.in[static_cast<std::size_t>(v)]) {
      auto& dj = depth[static_cast<std::size_t>(j)];
      if (dj >= want) continue;
      const bool recurse = dj < 3 && want >= 3;
      dj = want;
      if (recurse) pending.push_back(j);
    }
  }
  return depth;
}

// Evaluates every marked row in the canonical order: level-major, vehicles
// ascending within a level. Each computed row performs the same operations
// in the same order no matter which other rows are marked, so a restricted
// evaluation reproduces the corresponding rows of the full build bit for
// bit. `hints` must hold one tilt hint per vehicle.
void evaluate_rows(std::vector<Row>& team, CouplingModel model,
                   const CouplingGraph& g, const ModelParams& mp,
                   const std::vector<double>& hints) {
  const int n = static_cast<int>(team.size());
  for (int k = 1; k <= kRows; ++k) {
    for (int v = 0; v < n; ++v) {
      Row& row = team[static_cast<std::size_t>(v)];
      if (row.depth < k) continue;
      if (k == 1) {
        row.rows.push_back(*row.src);
        continue;
      }
      const Vec2<Jet>& prev = row.rows[static_cast<std::size_t>(k - 2)];
      Vec2<Jet> rate{derivative(prev.x), derivative(prev.y)};
      const int ord = rate.x.order();
      if (k == 3 && model != CouplingModel::nominal) {
        Jet force = Jet::constant(0.0, ord);
        for (int j : g.in[static_cast<std::size_t>(v)]) {
          if (model == CouplingModel::exact && j >= v) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "exact recursion needs vehicle %d before vehicle "
                          "%d; vehicle indices must follow the altitude order",
                          j, v);
            throw ordering_error(buf);
          }
          const Vec2<Jet>& pj = team[static_cast<std::size_t>(j)].rows[0];
          const Vec2<Jet>& pv = row.rows[0];
          const Vec2<Jet> delta{(pj.x - pv.x).truncated(ord),
                                (pj.y - pv.y).truncated(ord)};
          if (model == CouplingModel::exact)
            force += drag_force(delta, team[static_cast<std::size_t>(j)].rows[2].x,
                                mp.downwash);
          else
            force += approx_drag_force(delta, mp.downwash, mp.quad);
        }
        rate.y -= force / mp.quad.mass;
      }
      if (k == 5 && model == CouplingModel::exact && mp.torque_coupling) {
        Jet torque = Jet::constant(0.0, ord);
        for (int j : g.in[static_cast<std::size_t>(v)]) {
          const Vec2<Jet>& pj = team[static_cast<std::size_t>(j)].rows[0];
          const Vec2<Jet>& pv = row.rows[0];
          const Vec2<Jet> delta{(pj.x - pv.x).truncated(ord),
                                (pj.y - pv.y).truncated(ord)};
          torque += drag_torque(
              delta, team[static_cast<std::size_t>(j)].rows[2].x.truncated(ord),
              mp.downwash);
        }
        rate.y -= torque / mp.quad.inertia;
      }
      try {
        row.rows.push_back(inverse_level_map(
            k - 1, rate, mp.quad, hints[static_cast<std::size_t>(v)]));
      } catch (const singular_inverse_error& e) {
        char buf[224];
        std::snprintf(buf, sizeof(buf), "vehicle %d: %s", v, e.what());
        throw singular_inverse_error(buf);
      }
    }
  }
}

void check_graph(const char* who, int n, CouplingModel model,
                 const CouplingGraph& g) {
  if (g.n != n) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s: graph has %d vehicles, data has %d",
                  who, g.n, n);
    throw std::invalid_argument(buf);
  }
  if (g.model != model) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%s: graph was built for the %s model, not %s", who,
                  to_string(g.model), to_string(model));
    throw std::invalid_argument(buf);
  }
}

void check_jet_order(const char* who, const Vec2<Jet>& y, int d) {
  if (y.x.order() != d || y.y.order() != d)
    throw std::invalid_argument(
        std::string(who) + ": all bundle jets must share one order");
}

SubsystemState state_from_rows(const std::vector<Vec2<Jet>>& rows) {
  SubsystemState s;
  for (int k = 0; k < 4; ++k) {
    const Vec2<Jet>& p = rows[static_cast<std::size_t>(k)];
    s.level[static_cast<std::size_t>(k)] = {p.x.value(), p.y.value()};
  }
  return s;
}

}  // namespace

DiffeoOutput build_joint_diffeo(const FlatJetBundle& bundle,
                                CouplingModel model, const CouplingGraph& g,
                                const ModelParams& mp,
                                const std::vector<double>& tilt_hints) {
  const int n = bundle.size();
  if (n == 0) throw std::invalid_argument("build_joint_diffeo: empty bundle");
  check_graph("build_joint_diffeo", n, model, g);
  const int d = bundle.order();
  if (d < 4)
    throw std::invalid_argument(
        "build_joint_diffeo: jet order must be at least 4");
  for (const Vec2<Jet>& y : bundle.y) check_jet_order("build_joint_diffeo", y, d);
  if (!tilt_hints.empty() && static_cast<int>(tilt_hints.size()) != n)
    throw std::invalid_argument(
        "build_joint_diffeo: tilt_hints must be empty or hold one entry per "
        "vehicle");

  const std::vector<double> hints =
      tilt_hints.empty() ? std::vector<double>(static_cast<std::size_t>(n), 0.0)
                         : tilt_hints;
  std::vector<Row> team(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    team[static_cast<std::size_t>(v)].src = &bundle.y[static_cast<std::size_t>(v)];
    team[static_cast<std::size_t>(v)].depth = kRows;
    team[static_cast<std::size_t>(v)].rows.reserve(kRows);
  }
  evaluate_rows(team, model, g, mp, hints);

  DiffeoOutput out;
  out.states.sub.resize(static_cast<std::size_t>(n));
  out.inputs.u.resize(static_cast<std::size_t>(n));
  out.phi.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    auto& rows = team[static_cast<std::size_t>(v)].rows;
    out.states.sub[static_cast<std::size_t>(v)] = state_from_rows(rows);
    out.inputs.u[static_cast<std::size_t>(v)] = {rows[4].x.value(),
                                                 rows[4].y.value()};
    out.phi[static_cast<std::size_t>(v)] = std::move(rows);
  }
  return out;
}

VehicleEval evaluate_vehicle(int i, const PartialBundle& data,
                             CouplingModel model, const CouplingGraph& g,
                             const ModelParams& mp, double tilt_hint) {
  if (i < 0 || i >= g.n)
    throw std::invalid_argument("evaluate_vehicle: vehicle index out of range");
  check_graph("evaluate_vehicle", g.n, model, g);

  const std::vector<int> depth = needed_depths(i, kRows, g, model);
  std::vector<Row> team(static_cast<std::size_t>(g.n));
  int d = -1;
  for (int v = 0; v < g.n; ++v) {
    if (depth[static_cast<std::size_t>(v)] == 0) continue;
    auto it = data.y.find(v);
    if (it == data.y.end()) {
      char buf[192];
      std::snprintf(buf, sizeof(buf),
                    "vehicle %d under the %s model needs vehicle %d, which "
                    "is outside the provided data",
                    i, to_string(model), v);
      throw info_contract_error(buf);
    }
    if (d < 0) d = it->second.x.order();
    check_jet_order("evaluate_vehicle", it->second, d);
    team[static_cast<std::size_t>(v)].src = &it->second;
    team[static_cast<std::size_t>(v)].depth = depth[static_cast<std::size_t>(v)];
    team[static_cast<std::size_t>(v)].rows.reserve(
        static_cast<std::size_t>(depth[static_cast<std::size_t>(v)]));
  }
  if (d < 4)
    throw std::invalid_argument(
        "evaluate_vehicle: jet order must be at least 4");

  std::vector<double> hints(static_cast<std::size_t>(g.n), 0.0);
  hints[static_cast<std::size_t>(i)] = tilt_hint;
  evaluate_rows(team, model, g, mp, hints);

  auto& rows = team[static_cast<std::size_t>(i)].rows;
  VehicleEval out;
  out.state = state_from_rows(rows);
  out.input = {rows[4].x.value(), rows[4].y.value()};
  out.phi = std::move(rows);
  return out;
}

std::vector<std::array<double, 8>> forward_flat_states(
    const JointState& state, CouplingModel model, const CouplingGraph& g,
    const ModelParams& mp) {
  const int n = state.size();
  check_graph("forward_flat_states", n, model, g);

  std::vector<std::array<double, 8>> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const SubsystemState& xi = state.sub[static_cast<std::size_t>(i)];
    // Order-1 jets carry (value, first derivative); lifting the thrust map
    // and the coupling through them yields acceleration and jerk at once.
    const Vec2<Jet> thrust_tilt{Jet{xi.thrust(), xi.thrust_rate()},
                                Jet{xi.tilt(), xi.ang_rate()}};
    Vec2<Jet> accel = thrust_accel(thrust_tilt, mp.quad);
    if (model != CouplingModel::nominal) {
      Jet force{0.0, 0.0};
      for (int j : g.in[static_cast<std::size_t>(i)]) {
        const SubsystemState& xj = state.sub[static_cast<std::size_t>(j)];
        const Vec2<Jet> delta{
            Jet{xj.pos().x - xi.pos().x, xj.vel().x - xi.vel().x},
            Jet{xj.pos().y - xi.pos().y, xj.vel().y - xi.vel().y}};
        if (model == CouplingModel::exact)
          force += drag_force(delta, Jet{xj.thrust(), xj.thrust_rate()},
                              mp.downwash);
        else
          force += approx_drag_force(delta, mp.downwash, mp.quad);
      }
      accel.y += force / mp.quad.mass;
    }
    z[static_cast<std::size_t>(i)] = {
        xi.pos().x,       xi.pos().y,       xi.vel().x,
        xi.vel().y,       accel.x.value(),  accel.y.value(),
        accel.x.derivative(1), accel.y.derivative(1)};
  }
  return z;
}

}  // namespace flatswarm
