#pragma once

// Shortest edge loop with nontrivial holonomy. From every source a shortest
// path tree is grown with holonomy accumulated along it; each non-tree edge
// closes a loop whose group element decides contractibility.

#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "toda/mesh.hpp"
#include "toda/parallel.hpp"

namespace toda {

namespace detail {

struct HalfEdge {
  int to = 0;
  int edge = 0;
  bool forward = true;
};

inline std::vector<std::vector<HalfEdge>> vertex_adjacency(const HyperbolicMesh& mesh) {
  std::vector<std::vector<HalfEdge>> adj(mesh.vertex_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Edge& E = mesh.edges[e];
    adj[E.tail].push_back({E.head, e, true});
    adj[E.head].push_back({E.tail, e, false});
  }
  return adj;
}

inline double systole_through(const HyperbolicMesh& mesh,
                              const std::vector<std::vector<HalfEdge>>& adj, int source) {
  const int V = mesh.vertex_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(V, inf);
  std::vector<int> parent_edge(V, -1);
  std::vector<Mobius> hol(V);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [d, x] = pq.top();
    pq.pop();
    if (d > dist[x]) continue;
    for (const HalfEdge& h : adj[x]) {
      const Edge& E = mesh.edges[h.edge];
      const double nd = d + E.length;
      if (nd < dist[h.to]) {
        dist[h.to] = nd;
        parent_edge[h.to] = h.edge;
        hol[h.to] = hol[x] * (h.forward ? E.holonomy_matrix : E.holonomy_matrix.inverse());
        pq.push({nd, h.to});
      }
    }
  }
  double best = inf;
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Edge& E = mesh.edges[e];
    if (parent_edge[E.head] == e || parent_edge[E.tail] == e) {
      if (E.tail != E.head) continue;
    }
    const double len = dist[E.tail] + E.length + dist[E.head];
    if (!(len < best)) continue;
    const Mobius loop = hol[E.tail] * E.holonomy_matrix * hol[E.head].inverse();
    if (!is_identity_element(loop)) best = len;
  }
  return best;
}

}  // namespace detail

inline double systole(const HyperbolicMesh& mesh) {
  const auto adj = detail::vertex_adjacency(mesh);
  std::vector<double> per_source(mesh.vertex_count());
  parallel_for(mesh.vertex_count(),
               [&](int s) { per_source[s] = detail::systole_through(mesh, adj, s); });
  double best = std::numeric_limits<double>::infinity();
  for (double x : per_source) best = std::min(best, x);
  return best;
}

/// Shortest translation length among group elements given by reduced words
/// of length <= max_len in the standard generators.
inline double shortest_geodesic_by_words(int max_len) {
  double best = std::numeric_limits<double>::infinity();
  const auto& gens = standard_generators();
  std::function<void(const Mobius&, int, int)> rec = [&](const Mobius& m, int last, int len) {
    if (len > 0) {
      const double l = m.translation_length();
      if (!is_identity_element(m) && l < best) best = l;
    }
    if (len == max_len) return;
    for (int l = -4; l <= 4; ++l) {
      if (l == 0 || l == -last) continue;
      rec(m * (l > 0 ? gens[l - 1] : gens[-l - 1].inverse()), l, len + 1);
    }
  };
  rec(Mobius::identity(), 0, 0);
  return best;
}

}  // namespace toda
