#pragma once

// Triangulated closed hyperbolic surface stored as a Delta-complex. Each
// triangle carries a developed copy in the disk: corner c is the canonical
// position of its vertex moved by the chart h_c of that corner. Edges are
// identified by endpoints plus holonomy, so loops and multi-edges are fine.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "toda/errors.hpp"
#include "toda/hyperbolic.hpp"
#include "toda/surface_group.hpp"

namespace toda {

struct Edge {
  int tail = 0;
  int head = 0;
  double length = 0.0;
  /// Group element carrying the head's canonical frame into the tail's,
  /// h_tail^{-1} h_head for any triangle containing the edge.
  Word holonomy;
  Mobius holonomy_matrix;
};

/// Per-vertex bookkeeping for a mesh produced by `build_cover`.
struct CoverData {
  int degree = 1;
  int base_vertex_count = 0;
  int base_triangle_count = 0;
  std::vector<int> base_vertex;
  std::vector<int> sheet;
};

/// Corner input for `HyperbolicMesh::assemble`.
struct TriangleChart {
  std::array<int, 3> vertices{};
  std::array<Word, 3> words;
};

class HyperbolicMesh {
 public:
  int genus = 2;
  int level = 0;
  std::vector<Complex> vertex_positions;
  std::vector<std::array<int, 3>> triangles;
  /// Side k of a triangle joins corner k to corner k+1.
  std::vector<std::array<int, 3>> triangle_edges;
  /// 1 when side k runs against the stored edge orientation.
  std::vector<std::array<std::uint8_t, 3>> triangle_edge_flips;
  std::vector<std::array<Word, 3>> corner_words;
  std::vector<std::array<Mobius, 3>> corner_charts;
  std::vector<std::array<Complex, 3>> corner_positions;
  std::vector<Edge> edges;
  std::vector<double> triangle_areas;
  std::vector<double> vertex_areas;
  std::optional<CoverData> cover;

  int vertex_count() const { return static_cast<int>(vertex_positions.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int euler_characteristic() const { return vertex_count() - edge_count() + triangle_count(); }

  double volume() const {
    double s = 0.0;
    for (double a : triangle_areas) s += a;
    return s;
  }

  /// Side lengths of triangle t, side k opposite corner (k+2) mod 3.
  std::array<double, 3> side_lengths(int t) const {
    return {edges[triangle_edges[t][0]].length, edges[triangle_edges[t][1]].length,
            edges[triangle_edges[t][2]].length};
  }

  /// Corner angles/cotangents of triangle t indexed by corner.
  TriangleGeometry corner_geometry(int t) const {
    const auto l = side_lengths(t);
    // corner k faces side k+1
    return triangle_geometry(l[1], l[2], l[0]);
  }

  /// Builds edges, lengths, and areas from triangles with corner charts.
  /// Edges come out numbered in order of first appearance.
  static HyperbolicMesh assemble(int genus, int level, std::vector<Complex> positions,
                                 const std::vector<TriangleChart>& tris) {
    HyperbolicMesh m;
    m.genus = genus;
    m.level = level;
    m.vertex_positions = std::move(positions);
    const int F = static_cast<int>(tris.size());
    m.triangles.resize(F);
    m.triangle_edges.resize(F);
    m.triangle_edge_flips.resize(F);
    m.corner_words.resize(F);
    m.corner_charts.resize(F);
    m.corner_positions.resize(F);

    std::map<std::pair<int, int>, std::vector<int>> buckets;
    constexpr double match_tol = 1e-7;

    for (int t = 0; t < F; ++t) {
      const auto& tc = tris[t];
      m.triangles[t] = tc.vertices;
      for (int c = 0; c < 3; ++c) {
        m.corner_words[t][c] = tc.words[c];
        m.corner_charts[t][c] = evaluate(tc.words[c]);
        m.corner_positions[t][c] = m.corner_charts[t][c](m.vertex_positions.at(tc.vertices[c]));
      }
      for (int k = 0; k < 3; ++k) {
        const int c0 = k, c1 = (k + 1) % 3;
        const int v0 = tc.vertices[c0], v1 = tc.vertices[c1];
        const Mobius hol = m.corner_charts[t][c0].inverse() * m.corner_charts[t][c1];
        // Forward orientation v0 -> v1: head lands at hol(p_v1) in v0's frame.
        const Complex fwd = hol(m.vertex_positions[v1]);
        const Complex bwd = hol.inverse()(m.vertex_positions[v0]);
        const auto key = std::minmax(v0, v1);
        auto& bucket = buckets[{key.first, key.second}];
        int found = -1;
        std::uint8_t flip = 0;
        for (int e : bucket) {
          const Edge& E = m.edges[e];
          const Complex head_img = E.holonomy_matrix(m.vertex_positions[E.head]);
          if (E.tail == v0 && E.head == v1 && std::abs(head_img - fwd) < match_tol) {
            found = e;
            flip = 0;
            break;
          }
          if (E.tail == v1 && E.head == v0 && std::abs(head_img - bwd) < match_tol) {
            found = e;
            flip = 1;
            break;
          }
        }
        if (found < 0) {
          Edge E;
          E.tail = v0;
          E.head = v1;
          E.holonomy = tc.words[c0].inverse() * tc.words[c1];
          E.holonomy_matrix = hol;
          E.length = disk_distance(m.corner_positions[t][c0], m.corner_positions[t][c1]);
          found = static_cast<int>(m.edges.size());
          m.edges.push_back(std::move(E));
          bucket.push_back(found);
        }
        m.triangle_edges[t][k] = found;
        m.triangle_edge_flips[t][k] = flip;
      }
    }
    m.compute_areas();
    return m;
  }

  void compute_areas() {
    const int F = triangle_count();
    triangle_areas.assign(F, 0.0);
    vertex_areas.assign(vertex_count(), 0.0);
    for (int t = 0; t < F; ++t) {
      const double a = corner_geometry(t).area;
      triangle_areas[t] = a;
      for (int c = 0; c < 3; ++c) vertex_areas[triangles[t][c]] += a / 3.0;
    }
  }

  /// Tail corner index (within triangle t) of the stored orientation of side k.
  int side_tail_corner(int t, int k) const {
    return triangle_edge_flips[t][k] ? (k + 1) % 3 : k;
  }

  /// Group element obtained by going around triangle t's boundary.
  Mobius boundary_holonomy(int t) const {
    Mobius g = Mobius::identity();
    for (int k = 0; k < 3; ++k) {
      const Edge& E = edges[triangle_edges[t][k]];
      g = g * (triangle_edge_flips[t][k] ? E.holonomy_matrix.inverse() : E.holonomy_matrix);
    }
    return g;
  }
};

}  // namespace toda
