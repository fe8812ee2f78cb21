#include "flatswarm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include "flatswarm/errors.hpp"

namespace flatswarm {

const char* to_string(CouplingModel model) {
  switch (model) {
    case CouplingModel::nominal: return "nominal";
    case CouplingModel::exact: return "exact";
    case CouplingModel::approximate: return "approximate";
  }
  return "unknown";
}

bool CouplingGraph::has_edge(int j, int i) const {
  if (i < 0 || i >= n) return false;
  return std::binary_search(in[i].begin(), in[i].end(), j);
}

int CouplingGraph::edge_count() const {
  int total = 0;
  for (const auto& list : in) total += static_cast<int>(list.size());
  return total;
}

bool CouplingGraph::lower_triangular() const {
  for (int i = 0; i < n; ++i)
    for (int j : in[i])
      if (j >= i) return false;
  return true;
}

std::vector<std::pair<int, int>> CouplingGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count());
  for (int i = 0; i < n; ++i)
    for (int j : in[i]) out.emplace_back(j, i);
  return out;
}

CouplingGraph build_graph(const JointState& state, CouplingModel model,
                          const Vec2d& threshold) {
  CouplingGraph g;
  g.n = state.size();
  g.model = model;
  g.in.assign(g.n, {});
  if (model == CouplingModel::nominal) return g;

  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (j == i) continue;
      const Vec2d d = state.sub[j].pos() - state.sub[i].pos();
      if (model == CouplingModel::exact) {
        if (d.y == 0.0) {
          char msg[96];
          std::snprintf(msg, sizeof msg,
                        "altitude tie between vehicles %d and %d", std::min(i, j),
                        std::max(i, j));
          throw ordering_error(msg);
        }
        if (d.y > 0.0) g.in[i].push_back(j);
      } else {
        if (d.y > 0.0 && d.y < threshold.y && std::abs(d.x) < threshold.x)
          g.in[i].push_back(j);
      }
    }
  }
  return g;
}

namespace {

// Shortest directed-path distance from every vehicle to i (hops against edge
// direction, walking the in-lists). -1 marks unreachable.
std::vector<int> hop_distances(const CouplingGraph& g, int i) {
  std::vector<int> dist(g.n, -1);
  dist[i] = 0;
  std::queue<int> frontier;
  frontier.push(i);
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int j : g.in[v]) {
      if (dist[j] < 0) {
        dist[j] = dist[v] + 1;
        frontier.push(j);
      }
    }
  }
  return dist;
}

std::vector<int> collect_if(const std::vector<int>& dist, bool (*keep)(int, int),
                            int bound) {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(dist.size()); ++j)
    if (dist[j] >= 0 && keep(dist[j], bound)) out.push_back(j);
  return out;
}

}  // namespace

std::vector<int> k_hop_in_neighbors(const CouplingGraph& g, int i, int k) {
  const auto dist = hop_distances(g, i);
  return collect_if(dist, [](int d, int b) { return d == b; }, k);
}

std::vector<int> ancestors(const CouplingGraph& g, int i) {
  const auto dist = hop_distances(g, i);
  return collect_if(dist, [](int, int) { return true; }, 0);
}

std::vector<int> info_set(const CouplingGraph& g, int i, int k) {
  switch (g.model) {
    case CouplingModel::nominal:
      return {i};
    case CouplingModel::exact:
      return ancestors(g, i);
    case CouplingModel::approximate: {
      const auto dist = hop_distances(g, i);
      return collect_if(dist, [](int d, int b) { return d <= b; }, k - 1);
    }
  }
  return {i};
}

}  // namespace flatswarm
