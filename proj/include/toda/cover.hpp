#pragma once

// Finite covers from permutation representations of the surface group. The
// cover is H^2 x {0..n-1} modulo gamma.(x, s) = (gamma x, pi(gamma) s); vertex
// (v, s) gets index s*V + v and triangle (t, s) index s*F + t.

#include <vector>

#include "toda/mesh.hpp"
#include "toda/surface_group.hpp"

namespace toda {

inline HyperbolicMesh build_cover(const HyperbolicMesh& base, const CoverSpec& spec) {
  spec.validate();
  if (base.cover) throw MeshMismatch("covers of covers are not supported");
  const int n = spec.degree;
  const int V = base.vertex_count();
  const int F = base.triangle_count();

  std::vector<Complex> pos;
  pos.reserve(static_cast<std::size_t>(n) * V);
  for (int s = 0; s < n; ++s) pos.insert(pos.end(), base.vertex_positions.begin(), base.vertex_positions.end());

  std::vector<std::array<Permutation, 3>> corner_perm(F);
  for (int t = 0; t < F; ++t)
    for (int c = 0; c < 3; ++c) corner_perm[t][c] = invert(spec.image(base.corner_words[t][c]));

  std::vector<TriangleChart> tris;
  tris.reserve(static_cast<std::size_t>(n) * F);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < F; ++t) {
      TriangleChart tc;
      for (int c = 0; c < 3; ++c) {
        tc.vertices[c] = corner_perm[t][c][s] * V + base.triangles[t][c];
        tc.words[c] = base.corner_words[t][c];
      }
      tris.push_back(std::move(tc));
    }
  }

  const int genus = n * (base.genus - 1) + 1;
  HyperbolicMesh m = HyperbolicMesh::assemble(genus, base.level, std::move(pos), tris);
  CoverData cd;
  cd.degree = n;
  cd.base_vertex_count = V;
  cd.base_triangle_count = F;
  cd.base_vertex.resize(static_cast<std::size_t>(n) * V);
  cd.sheet.resize(cd.base_vertex.size());
  for (int i = 0; i < n * V; ++i) {
    cd.base_vertex[i] = i % V;
    cd.sheet[i] = i / V;
  }
  m.cover = std::move(cd);
  return m;
}

/// Pulls a base vertex field back to the cover.
inline std::vector<double> lift_field(const HyperbolicMesh& cover, const std::vector<double>& base) {
  if (!cover.cover) throw MeshMismatch("mesh carries no cover data");
  const auto& cd = *cover.cover;
  if (static_cast<int>(base.size()) != cd.base_vertex_count)
    throw MeshMismatch("field size does not match the base mesh");
  std::vector<double> out(cover.vertex_count());
  for (int i = 0; i < cover.vertex_count(); ++i) out[i] = base[cd.base_vertex[i]];
  return out;
}

}  // namespace toda
