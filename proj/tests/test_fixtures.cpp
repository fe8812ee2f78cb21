#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "flatswarm/control.hpp"
#include "flatswarm/downwash.hpp"
#include "flatswarm/graph.hpp"
#include "flatswarm/state.hpp"

// These tests replay the checked-in reference tables produced by the CLI's
// oracle command (see tools/). Each table was computed by an independent
// numerical route: adaptive quadrature for the wake integrals, the
// Hamiltonian stable subspace for the Riccati solutions, and a plain BFS for
// the information sets. Regenerate with:
//   flatswarm oracle --out tests/fixtures

using flatswarm::CouplingGraph;
using flatswarm::CouplingModel;
using flatswarm::DownwashParams;
using flatswarm::JointState;
using flatswarm::Vec2d;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// Loads a fixture as split rows, dropping the header when `header` is set.
std::vector<std::vector<std::string>> load_rows(const std::string& name,
                                                bool header) {
  const std::string path = std::string(FLATSWARM_FIXTURE_DIR) + "/" + name;
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing fixture ", path,
                  " (regenerate with: flatswarm oracle --out tests/fixtures)");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && header) {
      first = false;
      continue;
    }
    first = false;
    rows.push_back(split(line, ','));
  }
  REQUIRE(!rows.empty());
  return rows;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

TEST_CASE("closed-form wake model matches the quadrature fixture") {
  const DownwashParams p;
  const auto rows = load_rows("downwash_reference.csv", true);
  CHECK(rows.size() >= 100);
  for (const auto& r : rows) {
    REQUIRE(r.size() == 6);
    const Vec2d delta{num(r[0]), num(r[1])};
    const double thrust = num(r[2]);
    const double wind_ref = num(r[3]);
    const double force_ref = num(r[4]);
    const double torque_ref = num(r[5]);
    CAPTURE(delta.x);
    CAPTURE(delta.y);
    CAPTURE(thrust);

    const double wind = flatswarm::wind_velocity(delta, thrust, p);
    const double force = flatswarm::drag_force(delta, thrust, p);
    const double torque = flatswarm::drag_torque(delta, thrust, p);

    CHECK(std::abs(wind - wind_ref) <= 1e-12 * std::abs(wind_ref));
    CHECK(std::abs(force - force_ref) <= 1e-10 * std::abs(force_ref));
    CHECK(std::abs(torque - torque_ref) <=
          1e-10 * std::max(std::abs(torque_ref), 1e-12));
  }
}

TEST_CASE("gain synthesis matches the Hamiltonian fixture") {
  const auto rows = load_rows("care_reference.csv", true);
  CHECK(rows.size() >= 5);
  const auto [A, B] = flatswarm::brunovsky_pair(4, 2);
  for (const auto& r : rows) {
    REQUIRE(r.size() == 2 + 16 + 64);
    const double q = num(r[0]);
    const double rr = num(r[1]);
    CAPTURE(q);
    CAPTURE(rr);

    Eigen::MatrixXd K_ref(2, 8), P_ref(8, 8);
    for (int i = 0; i < 16; ++i) K_ref(i / 8, i % 8) = num(r[2 + i]);
    for (int i = 0; i < 64; ++i) P_ref(i / 8, i % 8) = num(r[18 + i]);

    const auto gains = flatswarm::lqr_gain(
        A, B, q * Eigen::MatrixXd::Identity(8, 8),
        rr * Eigen::MatrixXd::Identity(2, 2));
    CHECK((gains.K - K_ref).norm() <= 1e-8 * K_ref.norm());
    CHECK((gains.P - P_ref).norm() <= 1e-8 * P_ref.norm());
  }
}

TEST_CASE("information sets match the breadth-first fixture") {
  const auto rows = load_rows("reachability_reference.csv", false);

  JointState state;
  int set_rows = 0;
  std::map<std::tuple<std::string, double, double>, CouplingGraph> graphs;
  for (const auto& r : rows) {
    REQUIRE(r.size() >= 4);
    if (r[0] == "pos") {
      const std::size_t i = static_cast<std::size_t>(num(r[1]));
      if (state.sub.size() <= i) state.sub.resize(i + 1);
      state.sub[i].level[0] = {num(r[2]), num(r[3])};
      continue;
    }
    REQUIRE(r[0] == "set");
    REQUIRE(r.size() == 7);
    const std::string& model_name = r[1];
    const Vec2d box{num(r[2]), num(r[3])};
    const int i = static_cast<int>(num(r[4]));
    const int k = static_cast<int>(num(r[5]));
    CAPTURE(model_name);
    CAPTURE(i);
    CAPTURE(k);

    const auto key = std::make_tuple(model_name, box.x, box.y);
    if (!graphs.count(key)) {
      CouplingModel model = CouplingModel::nominal;
      if (model_name == "exact") model = CouplingModel::exact;
      if (model_name == "approximate") model = CouplingModel::approximate;
      graphs.emplace(key, flatswarm::build_graph(state, model, box));
    }
    std::vector<int> members;
    for (const auto& m : split(r[6], ';')) members.push_back(std::stoi(m));
    CHECK(flatswarm::info_set(graphs.at(key), i, k) == members);
    ++set_rows;
  }
  CHECK(state.size() == 6);
  CHECK(set_rows == 144);
}
