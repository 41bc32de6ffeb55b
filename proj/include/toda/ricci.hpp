#pragma once

// Ricci equation  Delta v = c - e^{-2u} e^{2v} |alpha|^2.
// Variational route: maximise
//   J(w) = log( mean F e^{2w} ) - (1/(c vol)) int |grad w|^2,  F = e^{-2u}|alpha|^2,
// over zero-mean w, then translate by a constant. Newton on the equation
// gives a local branch and an independent check.

#include <Eigen/SparseLU>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

#include "toda/eigensolver.hpp"
#include "toda/errors.hpp"
#include "toda/laplacian.hpp"
#include "toda/mesh.hpp"
#include "toda/sections.hpp"

namespace toda {

struct RicciProblem {
  Vec u;
  SectionDensity density;
  double c = 0.0;
  double tol = 1e-9;  // gradient infinity norm
  int max_steps = 10000;
  int lbfgs_memory = 8;
};

struct RicciSolution {
  Vec v;
  Vec w;
  double J_value = 0.0;
  double grad_norm = 0.0;
  double mean_constraint_residual = 0.0;
  double residual = 0.0;  // equation residual of v, weighted infinity norm
  int iterations = 0;
  double distance_from_seed = 0.0;  // Newton only
};

/// c = 2 pi d / vol for a normal bundle of degree d.
inline RicciProblem make_ricci_problem(const DiscreteLaplacian& lap, const Vec& u,
                                       const SectionDensity& density, int d) {
  RicciProblem p;
  p.u = u;
  p.density = density;
  p.c = curvature_constant(d, lap.volume());
  return p;
}

namespace detail {

inline Vec log_weight(const RicciProblem& p) { return p.density.log_density - 2.0 * p.u; }

inline void check_ricci_problem(const DiscreteLaplacian& lap, const RicciProblem& p) {
  if (p.u.size() != lap.size() || p.density.log_density.size() != lap.size())
    throw MeshMismatch("Ricci data does not match the mesh");
  if (!p.u.allFinite()) throw DomainError("u must be finite");
  if (p.density.identically_zero()) {
    if (p.c > 0.0)
      throw InfeasibleError(
          "alpha vanishes identically but c > 0: integrating Delta v = c over the surface "
          "gives 0 = c vol");
    throw DomainError("alpha vanishes identically; J is undefined");
  }
  if (!(p.c > 0.0))
    throw InfeasibleError("c must be positive: the integral of Delta v vanishes but the "
                          "integral of -e^{-2u}e^{2v}|alpha|^2 does not");
}

inline void check_zero_mean(const DiscreteLaplacian& lap, const Vec& w) {
  const double m = lap.mean(w);
  if (std::abs(m) > 1e-10 * (1.0 + w.lpNorm<Eigen::Infinity>()))
    throw DomainError("w must have zero mean");
}

/// log of the M-mean of exp(a).
inline double log_mean(const DiscreteLaplacian& lap, const Vec& a) { return log_mean_exp(lap, a); }

}  // namespace detail

inline double eval_J(const DiscreteLaplacian& lap, const RicciProblem& p, const Vec& w) {
  detail::check_ricci_problem(lap, p);
  detail::check_zero_mean(lap, w);
  const Vec a = detail::log_weight(p) + 2.0 * w;
  return detail::log_mean(lap, a) - lap.dirichlet_energy(w) / (p.c * lap.volume());
}

/// Dual (Euclidean) gradient e with dJ(w).s = e.s, before projection.
inline Vec grad_J_dual(const DiscreteLaplacian& lap, const RicciProblem& p, const Vec& w) {
  const Vec a = detail::log_weight(p) + 2.0 * w;
  const double mx = a.maxCoeff();
  const Vec q = lap.mass().cwiseProduct(exp_field((a.array() - mx).matrix()));
  return 2.0 * q / q.sum() + (2.0 / (p.c * lap.volume())) * lap.apply(w);
}

/// Zero-mean gradient function g = M^-1 e - mean, so dJ(w).s = g^T M s.
inline Vec grad_J(const DiscreteLaplacian& lap, const RicciProblem& p, const Vec& w) {
  detail::check_ricci_problem(lap, p);
  detail::check_zero_mean(lap, w);
  const Vec e = grad_J_dual(lap, p, w);
  return (e.cwiseQuotient(lap.mass()).array() - e.sum() / lap.volume()).matrix();
}

/// v = w + (1/2) log(c / mean F e^{2w}).
inline Vec translate_v(const DiscreteLaplacian& lap, const RicciProblem& p, const Vec& w) {
  const double lm = detail::log_mean(lap, detail::log_weight(p) + 2.0 * w);
  return (w.array() + 0.5 * (std::log(p.c) - lm)).matrix();
}

inline Vec ricci_residual_vector(const DiscreteLaplacian& lap, const Vec& u, const Vec& v,
                                 const Vec& log_alpha, double c) {
  const Vec term = exp_field(log_alpha - 2.0 * u + 2.0 * v);
  return lap.apply(v).cwiseQuotient(lap.mass()) - (Vec::Constant(v.size(), c) - term);
}

/// || M^-1 L v - (c - e^{-2u} e^{2v} |alpha|^2) ||_inf
inline double ricci_residual(const DiscreteLaplacian& lap, const Vec& u, const Vec& v,
                             const SectionDensity& d, double c) {
  if (d.identically_zero()) return (lap.apply(v).cwiseQuotient(lap.mass()).array() - c).abs().maxCoeff();
  return ricci_residual_vector(lap, u, v, d.log_density, c).lpNorm<Eigen::Infinity>();
}

/// | mean e^{-2u} e^{2v} |alpha|^2 - c |
inline double ricci_mean_residual(const DiscreteLaplacian& lap, const Vec& u, const Vec& v,
                                  const SectionDensity& d, double c) {
  if (d.identically_zero()) return std::abs(c);
  return std::abs(std::exp(log_mean_exp(lap, d.log_density - 2.0 * u + 2.0 * v)) - c);
}

inline RicciSolution finish_ricci(const DiscreteLaplacian& lap, const RicciProblem& p,
                                  const Vec& w, int iterations) {
  RicciSolution s;
  s.w = w;
  s.v = translate_v(lap, p, w);
  s.J_value = eval_J(lap, p, w);
  s.grad_norm = grad_J(lap, p, w).lpNorm<Eigen::Infinity>();
  s.mean_constraint_residual = ricci_mean_residual(lap, p.u, s.v, p.density, p.c);
  s.residual = ricci_residual(lap, p.u, s.v, p.density, p.c);
  s.iterations = iterations;
  return s;
}

/// Preconditioned L-BFGS ascent from w = 0 with Armijo backtracking. The
/// preconditioner is (2/(c vol))(-L) + (4/vol) M, the Hessian of -J at
/// constant data up to its rank-one part.
inline RicciSolution maximize_J(const DiscreteLaplacian& lap, const RicciProblem& p,
                                const Vec* w0 = nullptr) {
  detail::check_ricci_problem(lap, p);
  const double vol = lap.volume();
  const Vec& M = lap.mass();

  SpMat P = (2.0 / (p.c * vol)) * (-lap.L());
  for (Eigen::Index i = 0; i < P.rows(); ++i) P.coeffRef(i, i) += (4.0 / vol) * M[i];
  Eigen::SimplicialLDLT<SpMat> prec(P);
  if (prec.info() != Eigen::Success) throw LinearSolveError("preconditioner factorization failed");

  auto project_dual = [&](const Vec& e) -> Vec { return e - M * (e.sum() / vol); };
  auto apply_h0 = [&](const Vec& e) -> Vec { return lap.project_zero_mean(prec.solve(e)); };

  Vec w = w0 ? lap.project_zero_mean(*w0) : Vec::Zero(lap.size());
  const double J0 = eval_J(lap, p, Vec::Zero(lap.size()));
  double J = eval_J(lap, p, w);
  Vec e = project_dual(grad_J_dual(lap, p, w));

  struct Pair {
    Vec s, y;
    double rho;
  };
  std::deque<Pair> mem;

  for (int it = 0; it <= p.max_steps; ++it) {
    const double gnorm = (e.cwiseQuotient(M)).lpNorm<Eigen::Infinity>();
    if (gnorm <= p.tol) return finish_ricci(lap, p, w, it);
    if (it == p.max_steps) break;

    // Two-loop recursion on the minimisation of -J (gradient -e).
    Vec q = e;
    std::vector<double> alpha(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      alpha[k] = mem[k].rho * mem[k].s.dot(q);
      q -= alpha[k] * (-mem[k].y);
    }
    Vec d = apply_h0(q);
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = mem[k].rho * (-mem[k].y).dot(d);
      d += (alpha[k] - beta) * mem[k].s;
    }
    d = lap.project_zero_mean(d);
    double slope = e.dot(d);
    if (!(slope > 0.0)) {
      mem.clear();
      d = apply_h0(e);
      slope = e.dot(d);
    }

    double t = 1.0;
    Vec wt;
    double Jt = 0.0;
    for (;;) {
      wt = lap.project_zero_mean(w + t * d);
      Jt = eval_J(lap, p, wt);
      if (std::isfinite(Jt) && Jt >= J + 1e-4 * t * slope) break;
      // J is flat to rounding near the maximiser; accept steps that shrink the gradient
      if (std::isfinite(Jt) && Jt >= J - 1e-13 * (1.0 + std::abs(J)) &&
          (project_dual(grad_J_dual(lap, p, wt)).cwiseQuotient(M)).lpNorm<Eigen::Infinity>() < gnorm)
        break;
      t *= 0.5;
      if (t < 1e-14) break;
    }
    if (t < 1e-14) {
      // Cannot ascend further at rounding level; restart once from steepest ascent.
      if (!mem.empty()) {
        mem.clear();
        continue;
      }
      if (gnorm <= 100.0 * p.tol) return finish_ricci(lap, p, w, it);
      throw NonConvergence("J ascent line search stalled");
    }
    const Vec et = project_dual(grad_J_dual(lap, p, wt));
    const Vec s = wt - w;
    const Vec y = et - e;  // -(grad(-J) difference)
    const double sy = -s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      mem.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > p.lbfgs_memory) mem.pop_front();
    }
    w = wt;
    J = Jt;
    e = et;
    if (J - J0 > 1e3)
      throw UnboundedDetected("J increased by more than 1e3 along the ascent: J is not bounded "
                              "above for this c vol");
  }
  throw NonConvergence("J maximisation did not reach the gradient tolerance");
}

/// Newton on L v - M (c - F e^{2v}) with Jacobian L + M diag(2 F e^{2v}).
inline RicciSolution solve_ricci_newton(const DiscreteLaplacian& lap, const RicciProblem& p,
                                        const Vec& v_init, double tol = 1e-11,
                                        int max_steps = 50) {
  detail::check_ricci_problem(lap, p);
  const Vec& M = lap.mass();
  const Vec lf = detail::log_weight(p);
  Vec v = v_init;
  auto residual = [&](const Vec& x) {
    return ricci_residual_vector(lap, p.u, x, p.density.log_density, p.c);
  };
  auto merit = [&](const Vec& r) { return 0.5 * r.dot(M.cwiseProduct(r)); };
  Vec r = residual(v);
  double phi = merit(r);
  Eigen::SparseLU<SpMat> lu;
  const SpMat L = lap.L();
  SpMat eye(lap.size(), lap.size());
  eye.setIdentity();
  lu.analyzePattern(SpMat(L + eye));
  int steps = 0;
  while (r.lpNorm<Eigen::Infinity>() > tol) {
    if (steps == max_steps) throw NonConvergence("Ricci Newton did not converge");
    SpMat J = L;
    const Vec D = 2.0 * exp_field(lf + 2.0 * v);
    for (Eigen::Index i = 0; i < v.size(); ++i) J.coeffRef(i, i) += M[i] * D[i];
    lu.factorize(J);
    if (lu.info() != Eigen::Success)
      throw SingularJacobian("Ricci Jacobian is singular: the stability hypothesis fails");
    const Vec delta = lu.solve(-M.cwiseProduct(r));
    if (!delta.allFinite())
      throw SingularJacobian("Ricci Jacobian is singular: the stability hypothesis fails");
    double s = 1.0;
    Vec vt, rt;
    double phit = 0.0;
    for (;;) {
      vt = v + s * delta;
      rt = residual(vt);
      phit = merit(rt);
      if (phit <= (1.0 - 1e-4 * s) * phi) break;
      s *= 0.5;
      if (s < 1e-12) throw NonConvergence("Ricci Newton line search stalled");
    }
    v = vt;
    r = rt;
    phi = phit;
    ++steps;
  }
  RicciSolution sol;
  sol.v = v;
  sol.w = lap.project_zero_mean(v);
  sol.J_value = eval_J(lap, p, sol.w);
  sol.grad_norm = grad_J(lap, p, sol.w).lpNorm<Eigen::Infinity>();
  sol.mean_constraint_residual = ricci_mean_residual(lap, p.u, v, p.density, p.c);
  sol.residual = r.lpNorm<Eigen::Infinity>();
  sol.iterations = steps;
  sol.distance_from_seed = (v - v_init).lpNorm<Eigen::Infinity>();
  return sol;
}

/// Stability operator H = L + 2 M diag(e^{2v} f) with f = e^{-2u}|alpha|^2.
struct StabilityReport {
  double sup_term = 0.0;           // 2 sup e^{2v} f
  double lambda1 = 0.0;            // usual convention (smallest positive eigenvalue of -L)
  double lambda_reciprocal = 0.0;  // 1/lambda1
  double window_lo = 0.0;          // -lambda1 + sup_term
  double window_hi = 0.0;          // 2c
  bool hypothesis = false;         // sup_term < lambda1
  std::vector<double> violating;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double inverse_norm = 0.0;       // 1 / min |mu| in the M-inner product
  double inverse_bound = 0.0;      // max{(lambda1 - sup_term)^-1, c^-1}
};

inline StabilityReport stability_check(const DiscreteLaplacian& lap, const Vec& u, const Vec& v,
                                       const SectionDensity& d, double c, double lambda1) {
  StabilityReport rep;
  const Vec D = exp_field(d.log_density - 2.0 * u + 2.0 * v);
  rep.sup_term = 2.0 * D.maxCoeff();
  rep.lambda1 = lambda1;
  rep.lambda_reciprocal = 1.0 / lambda1;
  rep.window_lo = -lambda1 + rep.sup_term;
  rep.window_hi = 2.0 * c;
  rep.hypothesis = rep.sup_term < lambda1;

  Eigen::MatrixXd H = Eigen::MatrixXd(lap.L());
  for (Eigen::Index i = 0; i < H.rows(); ++i) H(i, i) += 2.0 * lap.mass()[i] * D[i];
  const EigenResult er = dense_generalized_eigs(H, lap.mass());
  rep.min_eigenvalue = er.values.minCoeff();
  rep.max_eigenvalue = er.values.maxCoeff();
  double min_abs = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const double mu = er.values[i];
    min_abs = std::min(min_abs, std::abs(mu));
    if (mu > rep.window_lo && mu < rep.window_hi) rep.violating.push_back(mu);
  }
  rep.inverse_norm = 1.0 / min_abs;
  rep.inverse_bound = rep.hypothesis
                        ? std::max(1.0 / (lambda1 - rep.sup_term), 1.0 / c)
                        : std::numeric_limits<double>::infinity();
  return rep;
}

/// (2g - 2) sup e^{2v} |alpha|^2.
inline double pointwise_constant(const HyperbolicMesh& mesh, const Vec& v,
                                 const SectionDensity& d) {
  return (2.0 * mesh.genus - 2.0) * std::exp((d.log_density + 2.0 * v).maxCoeff());
}

struct BochnerReport {
  double laplacian_sq = 0.0;   // int (Delta w)^2
  double dirichlet = 0.0;      // int |grad w|^2
  double hessian_energy = 0.0; // sum M_i |Hess w|^2 from local quadratic fits
  double defect = 0.0;         // laplacian_sq + dirichlet - hessian_energy
};

/// Compares the two sides of the hyperbolic Bochner identity
///   int (Delta w)^2 + int |grad w|^2 = int |Hess w|^2.
/// The Hessian at each vertex comes from a least-squares quadratic fit in
/// normal coordinates over its one-ring.
inline BochnerReport bochner_report(const HyperbolicMesh& mesh, const DiscreteLaplacian& lap,
                                    const Vec& w) {
  BochnerReport rep;
  const Vec Lw = lap.apply(w);
  rep.laplacian_sq = Lw.dot(Lw.cwiseQuotient(lap.mass()));
  rep.dirichlet = lap.dirichlet_energy(w);

  const int V = mesh.vertex_count();
  std::vector<std::vector<std::pair<Complex, int>>> ring(V);
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int c = 0; c < 3; ++c) {
      const int vi = mesh.triangles[t][c];
      const Mobius back = mesh.corner_charts[t][c].inverse();
      for (int k = 1; k < 3; ++k) {
        const int cj = (c + k) % 3;
        ring[vi].push_back({back(mesh.corner_positions[t][cj]), mesh.triangles[t][cj]});
      }
    }
  for (int i = 0; i < V; ++i) {
    const Mobius to0 = Mobius::recentre(mesh.vertex_positions[i]);
    std::vector<std::pair<Complex, int>> pts;
    for (const auto& [z, j] : ring[i]) {
      const Complex y = to0(z);
      bool dup = false;
      for (const auto& q : pts)
        if (std::abs(q.first - y) < 1e-9) dup = true;
      if (!dup) pts.push_back({y, j});
    }
    if (pts.size() < 5) continue;
    Eigen::MatrixXd A(pts.size(), 5);
    Vec b(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Complex y = pts[k].first;
      const double r = 2.0 * std::atanh(std::abs(y));
      const double th = std::arg(y);
      const double x1 = r * std::cos(th), x2 = r * std::sin(th);
      A.row(k) << x1, x2, 0.5 * x1 * x1, x1 * x2, 0.5 * x2 * x2;
      b[k] = w[pts[k].second] - w[i];
    }
    const Vec coef = A.colPivHouseholderQr().solve(b);
    const double hxx = coef[2], hxy = coef[3], hyy = coef[4];
    rep.hessian_energy += lap.mass()[i] * (hxx * hxx + 2.0 * hxy * hxy + hyy * hyy);
  }
  rep.defect = rep.laplacian_sq + rep.dirichlet - rep.hessian_energy;
  return rep;
}

}  // namespace toda
