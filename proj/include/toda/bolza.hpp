#pragma once

// The Bolza surface: regular octagon with angles pi/4, opposite sides glued,
// coned to its centre, then refined by geodesic midpoint 1->4 splits.

#include <array>
#include <vector>

#include "toda/mesh.hpp"
#include "toda/surface_group.hpp"

namespace toda {

namespace detail {

/// Words w_k with w_k(P_0) = P_k for the eight octagon corners.
inline std::array<Word, 8> octagon_corner_words() {
  std::array<Word, 8> w;
  std::array<bool, 8> known{};
  known[0] = true;
  int remaining = 7;
  while (remaining > 0) {
    const int before = remaining;
    for (int k = 0; k < 8; ++k) {
      // g_k: P_{k+5} -> P_k and P_{k+4} -> P_{k+1}
      const Word g = octagon::side_pairing_word(k);
      const std::array<std::pair<int, int>, 2> moves{{{(k + 5) % 8, k}, {(k + 4) % 8, (k + 1) % 8}}};
      for (auto [from, to] : moves) {
        if (known[from] && !known[to]) {
          w[to] = g * w[from];
          known[to] = true;
          --remaining;
        }
      }
    }
    if (remaining == before) throw Error("octagon corner orbit is not transitive");
  }
  return w;
}

}  // namespace detail

/// Subdivides every triangle 1->4 at geodesic edge midpoints. Old vertices
/// keep their indices; the midpoint of edge e becomes vertex V + e.
inline HyperbolicMesh refine(const HyperbolicMesh& mesh) {
  const int V = mesh.vertex_count();
  const int E = mesh.edge_count();
  const int F = mesh.triangle_count();
  std::vector<Complex> pos = mesh.vertex_positions;
  pos.resize(V + E);
  std::vector<char> placed(E, 0);
  for (int t = 0; t < F; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edges[t][k];
      if (placed[e]) continue;
      const int ct = mesh.side_tail_corner(t, k);
      const int ch = (ct == k) ? (k + 1) % 3 : k;
      const Complex mid =
          disk_midpoint(mesh.corner_positions[t][ct], mesh.corner_positions[t][ch]);
      pos[V + e] = mesh.corner_charts[t][ct].inverse()(mid);
      placed[e] = 1;
    }
  }

  std::vector<TriangleChart> tris;
  tris.reserve(4 * static_cast<std::size_t>(F));
  for (int t = 0; t < F; ++t) {
    const auto& v = mesh.triangles[t];
    const auto& w = mesh.corner_words[t];
    std::array<int, 3> mv{};
    std::array<Word, 3> mw;
    for (int k = 0; k < 3; ++k) {
      mv[k] = V + mesh.triangle_edges[t][k];
      mw[k] = w[mesh.side_tail_corner(t, k)];
    }
    tris.push_back({{v[0], mv[0], mv[2]}, {w[0], mw[0], mw[2]}});
    tris.push_back({{mv[0], v[1], mv[1]}, {mw[0], w[1], mw[1]}});
    tris.push_back({{mv[2], mv[1], v[2]}, {mw[2], mw[1], w[2]}});
    tris.push_back({{mv[0], mv[1], mv[2]}, {mw[0], mw[1], mw[2]}});
  }
  return HyperbolicMesh::assemble(mesh.genus, mesh.level + 1, std::move(pos), tris);
}

/// Genus-2 Bolza mesh: vertex 0 is the octagon centre, vertex 1 the single
/// corner class; eight cone triangles, refined `refinement` times.
inline HyperbolicMesh build_base_surface(int refinement) {
  if (refinement < 0) throw DomainError("refinement must be >= 0");
  const auto w = detail::octagon_corner_words();
  std::vector<TriangleChart> tris;
  for (int k = 0; k < 8; ++k) tris.push_back({{0, 1, 1}, {Word{}, w[k], w[(k + 1) % 8]}});
  HyperbolicMesh m =
      HyperbolicMesh::assemble(2, 0, {Complex{0.0, 0.0}, octagon::corner(0)}, tris);
  for (int i = 0; i < refinement; ++i) m = refine(m);
  return m;
}

}  // namespace toda
