#pragma once

// Pointwise densities |alpha|^2 of holomorphic sections, synthesised from
// their zero divisor through the curvature identity
//   L log|alpha|^2 = 4 pi sum m_j delta_{z_j} - 2 c_L M 1,
// and the diagnostics used to study balanced families.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "toda/cover.hpp"
#include "toda/develop.hpp"
#include "toda/errors.hpp"
#include "toda/laplacian.hpp"
#include "toda/poisson.hpp"
#include "toda/systole.hpp"

namespace toda {

struct Divisor {
  std::vector<std::pair<int, int>> entries;  // (vertex, multiplicity)

  int degree() const {
    int d = 0;
    for (const auto& [v, m] : entries) d += m;
    return d;
  }

  void validate(int vertex_count) const {
    std::vector<char> seen(vertex_count, 0);
    for (const auto& [v, m] : entries) {
      if (v < 0 || v >= vertex_count) throw DomainError("divisor vertex out of range");
      if (m < 1) throw DomainError("divisor multiplicity must be >= 1");
      if (seen[v]) throw DomainError("divisor vertices must be distinct");
      seen[v] = 1;
    }
  }

  Vec indicator(int vertex_count) const {
    Vec d = Vec::Zero(vertex_count);
    for (const auto& [v, m] : entries) d[v] += m;
    return d;
  }
};

enum class Normalization { unit_mean, unit_sup };

inline std::string to_string(Normalization n) {
  return n == Normalization::unit_mean ? "unit_mean" : "unit_sup";
}

inline Normalization parse_normalization(const std::string& s) {
  if (s == "unit_mean") return Normalization::unit_mean;
  if (s == "unit_sup") return Normalization::unit_sup;
  throw FormatError("unknown normalization: " + s);
}

struct SectionDensity {
  Vec log_density;  // -inf everywhere encodes alpha == 0
  Divisor divisor;
  int degree = 0;
  double c_L = 0.0;
  Normalization normalization = Normalization::unit_mean;

  bool identically_zero() const {
    return log_density.size() > 0 &&
           std::all_of(log_density.begin(), log_density.end(),
                       [](double x) { return x == -std::numeric_limits<double>::infinity(); });
  }

  Vec density() const { return exp_field(log_density); }
};

struct BalanceReport {
  double sup_density = 0.0;
  double mean_density = 0.0;
  double ratio = 0.0;
  int genus = 0;
  int degree = 0;
  /// Shortest edge-path distance between distinct zeros (inf if fewer than two).
  double zero_spacing = std::numeric_limits<double>::infinity();
};

inline double curvature_constant(int degree, double volume) {
  return 2.0 * std::numbers::pi * degree / volume;
}

/// log of the M-mean of exp(x), shifted by max for stability.
inline double log_mean_exp(const DiscreteLaplacian& lap, const Vec& x) {
  const double mx = x.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  const double s = lap.mass().dot(exp_field((x.array() - mx).matrix()));
  return mx + std::log(s / lap.volume());
}

inline void apply_normalization(const DiscreteLaplacian& lap, SectionDensity& d) {
  if (d.identically_zero()) return;
  const double shift = d.normalization == Normalization::unit_mean
                           ? log_mean_exp(lap, d.log_density)
                           : d.log_density.maxCoeff();
  d.log_density.array() -= shift;
}

/// The identically zero section; admitted only as a degenerate input.
inline SectionDensity zero_section(const DiscreteLaplacian& lap, int degree) {
  SectionDensity d;
  d.log_density = Vec::Constant(lap.size(), -std::numeric_limits<double>::infinity());
  d.degree = degree;
  d.c_L = curvature_constant(degree, lap.volume());
  return d;
}

inline SectionDensity synth_density(const PoissonSolver& solver, const Divisor& divisor,
                                    Normalization normalization = Normalization::unit_mean) {
  const DiscreteLaplacian& lap = solver.laplacian();
  divisor.validate(lap.size());
  SectionDensity d;
  d.divisor = divisor;
  d.degree = divisor.degree();
  d.c_L = curvature_constant(d.degree, lap.volume());
  d.normalization = normalization;
  d.log_density = Vec::Zero(lap.size());
  if (d.degree > 0) {
    // one solve for the whole divisor: L x = sum m_j (e_j - M/vol)
    const Vec b = divisor.indicator(lap.size()) - lap.mass() * (d.degree / lap.volume());
    d.log_density = 4.0 * std::numbers::pi * solver.solve(b);
  }
  apply_normalization(lap, d);
  return d;
}

/// Infinity norm of the zero-mean projection of
///   L log|alpha|^2 - (4 pi D - 2 c_L M 1).
inline double poincare_lelong_residual(const DiscreteLaplacian& lap, const SectionDensity& d) {
  const Vec D = d.divisor.indicator(lap.size());
  Vec r = lap.apply(d.log_density) - (4.0 * std::numbers::pi * D - 2.0 * d.c_L * lap.mass());
  r -= lap.mass() * (r.sum() / lap.volume());
  return r.lpNorm<Eigen::Infinity>();
}

inline SectionDensity lift_density(const SectionDensity& base, const HyperbolicMesh& cover) {
  if (!cover.cover) throw MeshMismatch("target mesh is not a cover");
  const CoverData& cd = *cover.cover;
  if (base.log_density.size() != cd.base_vertex_count)
    throw MeshMismatch("density does not live on the cover's base mesh");
  SectionDensity d;
  d.log_density = to_vec(lift_field(cover, to_std(base.log_density)));
  for (const auto& [v, m] : base.divisor.entries)
    for (int s = 0; s < cd.degree; ++s) d.divisor.entries.push_back({s * cd.base_vertex_count + v, m});
  std::sort(d.divisor.entries.begin(), d.divisor.entries.end());
  d.degree = base.degree * cd.degree;
  d.c_L = base.c_L;
  d.normalization = base.normalization;
  return d;
}

inline double edge_path_distance(const HyperbolicMesh& mesh, int a, int b) {
  const auto adj = detail::vertex_adjacency(mesh);
  std::vector<double> dist(mesh.vertex_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[a] = 0.0;
  pq.push({0.0, a});
  while (!pq.empty()) {
    const auto [d, x] = pq.top();
    pq.pop();
    if (x == b) return d;
    if (d > dist[x]) continue;
    for (const auto& h : adj[x]) {
      const double nd = d + mesh.edges[h.edge].length;
      if (nd < dist[h.to]) {
        dist[h.to] = nd;
        pq.push({nd, h.to});
      }
    }
  }
  return dist[b];
}

inline BalanceReport balance_report(const HyperbolicMesh& mesh, const DiscreteLaplacian& lap,
                                    const SectionDensity& d) {
  BalanceReport r;
  r.genus = mesh.genus;
  r.degree = d.degree;
  r.sup_density = std::exp(d.log_density.maxCoeff());
  r.mean_density = std::exp(log_mean_exp(lap, d.log_density));
  r.ratio = std::exp(d.log_density.maxCoeff() - log_mean_exp(lap, d.log_density));
  const auto& z = d.divisor.entries;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j)
      r.zero_spacing = std::min(r.zero_spacing, edge_path_distance(mesh, z[i].first, z[j].first));
  return r;
}

/// Lift of a degree 4g-4 base density times a degree-1 section vanishing at z_n.
inline std::pair<SectionDensity, BalanceReport> balanced_lift(
    const SectionDensity& base, const HyperbolicMesh& base_mesh, const HyperbolicMesh& cover,
    const PoissonSolver& cover_solver, int z_n,
    Normalization normalization = Normalization::unit_mean) {
  if (base.degree != 4 * base_mesh.genus - 4)
    throw DomainError("balanced_lift expects a base density of degree 4g-4");
  SectionDensity lifted = lift_density(base, cover);
  const SectionDensity tau = synth_density(cover_solver, Divisor{{{z_n, 1}}}, normalization);
  SectionDensity d;
  d.log_density = lifted.log_density + tau.log_density;
  d.divisor = lifted.divisor;
  bool merged = false;
  for (auto& [v, m] : d.divisor.entries)
    if (v == z_n) {
      ++m;
      merged = true;
    }
  if (!merged) d.divisor.entries.push_back({z_n, 1});
  std::sort(d.divisor.entries.begin(), d.divisor.entries.end());
  d.degree = lifted.degree + 1;
  d.c_L = curvature_constant(d.degree, cover_solver.laplacian().volume());
  d.normalization = normalization;
  apply_normalization(cover_solver.laplacian(), d);
  return {d, balance_report(cover, cover_solver.laplacian(), d)};
}

struct OscillationReport {
  double c_out = 0.0;
  double c_in = 0.0;
  double lambda = 0.0;
  double sup_out = 0.0;  // of lambda |alpha|^2
  double inf_out = 0.0;
  int inside_count = 0;
};

inline const std::pair<int, int>& sole_zero(const SectionDensity& d) {
  if (d.degree != 1 || d.divisor.entries.size() != 1)
    throw DomainError("expects a degree-1 density with a single simple zero");
  return d.divisor.entries.front();
}

/// Renormalises so that (sup lambda|alpha|^2)(inf lambda|alpha|^2) = 1 outside
/// B(z0, r) and returns the resulting oscillation constants.
inline OscillationReport oscillation_report(const HyperbolicMesh& mesh, const SectionDensity& d,
                                            double r, double systole_length) {
  const int z0 = sole_zero(d).first;
  if (!(r < 0.5 * systole_length)) throw DomainError("radius must be below half the systole");
  const std::vector<double> dist = developed_distances(mesh, z0, r);
  double lo_out = std::numeric_limits<double>::infinity(), hi_out = -lo_out, hi_in = -lo_out;
  OscillationReport rep;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double x = d.log_density[v];
    if (dist[v] <= r) {
      hi_in = std::max(hi_in, x);
      ++rep.inside_count;
    } else {
      lo_out = std::min(lo_out, x);
      hi_out = std::max(hi_out, x);
    }
  }
  const double log_lambda = -0.5 * (lo_out + hi_out);
  rep.lambda = std::exp(log_lambda);
  rep.sup_out = std::exp(hi_out + log_lambda);
  rep.inf_out = std::exp(lo_out + log_lambda);
  rep.c_out = std::max(rep.sup_out, 1.0 / rep.inf_out);
  rep.c_in = std::exp(hi_in + log_lambda);
  return rep;
}

/// (cosh(x/2) / tanh(x/2))^2.
inline double schwarz_constant(double x) {
  const double q = std::cosh(0.5 * x) / std::tanh(0.5 * x);
  return q * q;
}

struct SchwarzReport {
  double radius = 0.0;
  double constant = 0.0;     // schwarz_constant(radius)
  double max_ratio = 0.0;    // max |alpha|^2(z) / (|z|^2 sup_dD |alpha|^2)
  int checked = 0;
  int boundary = 0;
  int violations = 0;        // vertices with ratio > constant
};

/// Checks |alpha|^2(z) <= C |z|^2 sup_{dD} |alpha|^2 on D = B(z0, radius)
/// with |z| = tanh(r(z)/2), skipping z0 and its one-ring. dD is the set of
/// vertices of D with a neighbour outside D.
inline SchwarzReport schwarz_check(const HyperbolicMesh& mesh, const SectionDensity& d,
                                   double radius, double constant) {
  const int z0 = sole_zero(d).first;
  const std::vector<double> dist = developed_distances(mesh, z0, radius);
  const int V = mesh.vertex_count();
  std::vector<char> inside(V, 0), ring(V, 0), bdry(V, 0);
  for (int v = 0; v < V; ++v) inside[v] = dist[v] <= radius;
  ring[z0] = 1;
  for (const auto& e : mesh.edges) {
    if (e.tail == z0) ring[e.head] = 1;
    if (e.head == z0) ring[e.tail] = 1;
    if (inside[e.tail] != inside[e.head]) {
      if (inside[e.tail]) bdry[e.tail] = 1;
      if (inside[e.head]) bdry[e.head] = 1;
    }
  }
  SchwarzReport rep;
  rep.radius = radius;
  rep.constant = constant;
  double log_sup_b = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < V; ++v)
    if (bdry[v]) {
      ++rep.boundary;
      log_sup_b = std::max(log_sup_b, d.log_density[v]);
    }
  if (rep.boundary == 0) throw DomainError("disk boundary is empty");
  for (int v = 0; v < V; ++v) {
    if (!inside[v] || ring[v]) continue;
    const double t = std::tanh(0.5 * dist[v]);
    const double ratio = std::exp(d.log_density[v] - log_sup_b) / (t * t);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.checked;
    if (ratio > constant) ++rep.violations;
  }
  return rep;
}

/// h(r) = -2a ln cosh(r/2) + B + ln tanh(r/2).
inline double radial_barrier(double r, double a, double B) {
  if (!(r > 0.0)) throw DomainError("radial barrier needs r > 0");
  return -2.0 * a * std::log(std::cosh(0.5 * r)) + B + std::log(std::tanh(0.5 * r));
}

/// dh/dr = -a tanh(r/2) + 1/sinh(r).
inline double radial_barrier_dr(double r, double a) {
  if (!(r > 0.0)) throw DomainError("radial barrier needs r > 0");
  return -a * std::tanh(0.5 * r) + 1.0 / std::sinh(r);
}

/// Area of a hyperbolic disk of radius r.
inline double disk_area(double r) {
  const double s = std::sinh(0.5 * r);
  return 4.0 * std::numbers::pi * s * s;
}

/// Coefficient a = 2 pi / area(B(r)) that makes the barrier flat at r.
inline double barrier_coefficient(double r) { return 2.0 * std::numbers::pi / disk_area(r); }

struct DiskPotential {
  Vec g;            // zero-mean solution of L g = M (c - a 1_D)
  double a = 0.0;   // 2 pi d / (discrete area of D)
  Vec indicator;
};

/// Zero-mean g with Delta g = c - a 1_D, D = B(z0, r), a fixed by solvability.
inline DiskPotential disk_potential(const HyperbolicMesh& mesh, const PoissonSolver& solver,
                                    int z0, double r, double c) {
  const DiscreteLaplacian& lap = solver.laplacian();
  const std::vector<double> dist = developed_distances(mesh, z0, r);
  DiskPotential p;
  p.indicator = Vec::Zero(lap.size());
  for (int v = 0; v < lap.size(); ++v)
    if (dist[v] <= r) p.indicator[v] = 1.0;
  const double area = lap.mass().dot(p.indicator);
  p.a = c * lap.volume() / area;
  const Vec b = c * lap.mass() - p.a * lap.mass().cwiseProduct(p.indicator);
  p.g = solver.solve(b);
  return p;
}

}  // namespace toda
