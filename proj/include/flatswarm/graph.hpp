#pragma once

#include <utility>
#include <vector>

#include "flatswarm/state.hpp"

namespace flatswarm {

// Which coupling terms the controller models. The plant always flies the
// exact physics; this enum selects what the graph/diffeomorphism assume.
enum class CouplingModel { nominal, exact, approximate };

const char* to_string(CouplingModel model);

// Directed influence graph at one state: edge (j, i) means vehicle j's wake
// enters vehicle i's dynamics. Immutable after construction and safe to
// share across threads.
struct CouplingGraph {
  int n = 0;
  CouplingModel model = CouplingModel::nominal;
  // in[i] lists the influencers j of vehicle i in ascending index order.
  // Every consumer iterates these lists in this order, which is what makes
  // restricted and full evaluations bitwise identical.
  std::vector<std::vector<int>> in;

  bool has_edge(int j, int i) const;
  int edge_count() const;
  // True when every edge (j, i) satisfies j < i under the fixed index order.
  bool lower_triangular() const;
  // All edges as (j, i) pairs, ordered by i then j.
  std::vector<std::pair<int, int>> edges() const;

  friend bool operator==(const CouplingGraph&, const CouplingGraph&) = default;
};

// Builds the active edge set for the given model.
//   nominal:     no edges.
//   exact:       (j, i) iff p^j_y > p^i_y; any altitude tie between distinct
//                vehicles throws ordering_error because the fixed acyclic
//                ordering is then ambiguous.
//   approximate: the exact predicate restricted to the open displacement box
//                |p^j_x - p^i_x| < threshold.x, p^j_y - p^i_y < threshold.y;
//                ties simply produce no edge.
CouplingGraph build_graph(const JointState& state, CouplingModel model,
                          const Vec2d& threshold);

// Vehicles whose shortest directed path to i has length exactly k, with
// N^0(i) = {i}. Ascending order.
std::vector<int> k_hop_in_neighbors(const CouplingGraph& g, int i, int k);

// Vehicles with any directed path to i, including i itself. Ascending order.
std::vector<int> ancestors(const CouplingGraph& g, int i);

// Vehicles whose flat outputs are needed to evaluate vehicle i's level-k
// diffeomorphism row under the graph's model: {i} for nominal, ancestors(i)
// for exact, and everything within k-1 hops upstream for approximate (the
// strongly lower-triangular case adds one hop per level). Ascending order.
std::vector<int> info_set(const CouplingGraph& g, int i, int k);

}  // namespace flatswarm
