#pragma once

// Cotangent Laplace-Beltrami operator with hyperbolic corner angles and a
// lumped (one third of incident area) mass. L is negative semidefinite.

#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "toda/errors.hpp"
#include "toda/mesh.hpp"

namespace toda {

using Vec = Eigen::VectorXd;

/// Entrywise exp with exp(-inf) == 0 exactly; Eigen's packet exp returns a subnormal there.
inline Vec exp_field(const Vec& x) {
  return x.unaryExpr([](double t) { return std::exp(t); });
}
using SpMat = Eigen::SparseMatrix<double>;

struct WeightedEdge {
  int i = 0;
  int j = 0;
  double w = 0.0;
};

class DiscreteLaplacian {
 public:
  explicit DiscreteLaplacian(const HyperbolicMesh& mesh) : n_(mesh.vertex_count()) {
    std::vector<double> ew(mesh.edge_count(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const TriangleGeometry g = mesh.corner_geometry(t);
      for (int k = 0; k < 3; ++k) {
        // side k is opposite corner (k+2) mod 3
        const double c = g.cot[(k + 2) % 3];
        if (!std::isfinite(c)) throw DegenerateTriangle("non-finite cotangent weight");
        ew[mesh.triangle_edges[t][k]] += 0.5 * c;
      }
    }
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const Edge& E = mesh.edges[e];
      if (E.tail == E.head) continue;  // loops cancel in the difference form
      edges_.push_back({E.tail, E.head, ew[e]});
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * edges_.size());
    for (const auto& e : edges_) {
      trip.emplace_back(e.i, e.j, e.w);
      trip.emplace_back(e.j, e.i, e.w);
      trip.emplace_back(e.i, e.i, -e.w);
      trip.emplace_back(e.j, e.j, -e.w);
    }
    L_.resize(n_, n_);
    L_.setFromTriplets(trip.begin(), trip.end());
    L_.makeCompressed();

    mass_ = Vec::Zero(n_);
    for (int v = 0; v < n_; ++v) mass_[v] = mesh.vertex_areas[v];
    volume_ = mass_.sum();
  }

  int size() const { return n_; }
  const SpMat& L() const { return L_; }
  const Vec& mass() const { return mass_; }
  double volume() const { return volume_; }
  const std::vector<WeightedEdge>& weighted_edges() const { return edges_; }

  /// L f evaluated edge by edge as sum w (f_j - f_i), which keeps the
  /// image of near-constant fields accurate.
  Vec apply(const Vec& f) const {
    Vec out = Vec::Zero(n_);
    for (const auto& e : edges_) {
      const double d = e.w * (f[e.j] - f[e.i]);
      out[e.i] += d;
      out[e.j] -= d;
    }
    return out;
  }

  /// Discrete Dirichlet pairing (grad f, grad g) = sum w (f_j - f_i)(g_j - g_i).
  double dirichlet_pairing(const Vec& f, const Vec& g) const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.w * (f[e.j] - f[e.i]) * (g[e.j] - g[e.i]);
    return s;
  }

  double dirichlet_energy(const Vec& f) const { return dirichlet_pairing(f, f); }

  double mean(const Vec& f) const { return mass_.dot(f) / volume_; }

  Vec project_zero_mean(const Vec& f) const {
    return (f.array() - mean(f)).matrix();
  }

 private:
  int n_ = 0;
  SpMat L_;
  Vec mass_;
  double volume_ = 0.0;
  std::vector<WeightedEdge> edges_;
};

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace toda
