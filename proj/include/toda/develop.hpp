#pragma once

// Developing map around a vertex: triangles are unfolded into the disk with
// the source at the origin, which gives exact surface distances (the mesh is
// built from genuine geodesic triangles) and the disk coordinate |z| of
// every vertex within a given radius.

#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "toda/mesh.hpp"

namespace toda {

struct TriangleAdjacency {
  /// For triangle t and side k: neighbouring triangle and its side index.
  std::vector<std::array<std::pair<int, int>, 3>> across;

  explicit TriangleAdjacency(const HyperbolicMesh& mesh) {
    const int F = mesh.triangle_count();
    across.assign(F, {std::pair{-1, -1}, std::pair{-1, -1}, std::pair{-1, -1}});
    std::vector<std::vector<std::pair<int, int>>> inc(mesh.edge_count());
    for (int t = 0; t < F; ++t)
      for (int k = 0; k < 3; ++k) inc[mesh.triangle_edges[t][k]].push_back({t, k});
    for (const auto& list : inc) {
      if (list.size() != 2) throw MeshMismatch("edge is not shared by exactly two sides");
      across[list[0].first][list[0].second] = list[1];
      across[list[1].first][list[1].second] = list[0];
    }
  }
};

/// Surface distance from `source` to every vertex, exact up to `radius`
/// (vertices further away get +inf).
inline std::vector<double> developed_distances(const HyperbolicMesh& mesh, int source,
                                               double radius,
                                               const TriangleAdjacency& adj) {
  const int F = mesh.triangle_count();
  std::vector<double> dist(mesh.vertex_count(), std::numeric_limits<double>::infinity());
  int t0 = -1, c0 = -1;
  for (int t = 0; t < F && t0 < 0; ++t)
    for (int c = 0; c < 3; ++c)
      if (mesh.triangles[t][c] == source) {
        t0 = t;
        c0 = c;
        break;
      }
  if (t0 < 0) throw MeshMismatch("source vertex not in any triangle");

  double max_edge = 0.0;
  for (const auto& e : mesh.edges) max_edge = std::max(max_edge, e.length);
  const double reach = std::tanh(0.5 * (radius + 2.0 * max_edge));

  // Placed copies per triangle, identified by developed centroid.
  std::vector<std::vector<Complex>> placed(F);
  struct Item {
    int t;
    Mobius g;
  };
  std::deque<Item> queue;
  queue.push_back({t0, Mobius::recentre(mesh.corner_positions[t0][c0])});
  constexpr double same_copy = 1e-9;

  while (!queue.empty()) {
    const Item it = queue.front();
    queue.pop_front();
    std::array<Complex, 3> z;
    for (int c = 0; c < 3; ++c) z[c] = it.g(mesh.corner_positions[it.t][c]);
    const Complex centroid = (z[0] + z[1] + z[2]) / 3.0;
    bool seen = false;
    for (const Complex& q : placed[it.t])
      if (std::abs(q - centroid) < same_copy) {
        seen = true;
        break;
      }
    if (seen) continue;
    placed[it.t].push_back(centroid);

    double nearest = 1.0;
    for (int c = 0; c < 3; ++c) {
      const double r = std::abs(z[c]);
      nearest = std::min(nearest, r);
      const double d = 2.0 * std::atanh(r);
      if (d <= radius) {
        const int v = mesh.triangles[it.t][c];
        dist[v] = std::min(dist[v], d);
      }
    }
    if (nearest > reach) continue;
    for (int k = 0; k < 3; ++k) {
      const auto [t2, k2] = adj.across[it.t][k];
      const int ct = mesh.side_tail_corner(it.t, k);
      const int ct2 = mesh.side_tail_corner(t2, k2);
      const Mobius g2 = it.g * mesh.corner_charts[it.t][ct] * mesh.corner_charts[t2][ct2].inverse();
      queue.push_back({t2, g2});
    }
  }
  return dist;
}

inline std::vector<double> developed_distances(const HyperbolicMesh& mesh, int source,
                                               double radius) {
  return developed_distances(mesh, source, radius, TriangleAdjacency(mesh));
}

}  // namespace toda
