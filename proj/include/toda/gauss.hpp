#pragma once

// Gauss equation  Delta u = e^{2u} - 1 + e^{-2u} f  for admissible data
// 0 <= f <= eta/(1+eta)^2. Damped Newton is the main solver; the monotone
// sub/supersolution iteration from u = 0 serves as an independent route.

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "toda/eigensolver.hpp"
#include "toda/errors.hpp"
#include "toda/laplacian.hpp"

namespace toda {

struct GaussProblem {
  Vec f;
  double eta = 1.0;
  double tol = 1e-10;
  int max_newton = 200;
  int max_monotone = 5000;
};

struct GaussSolution {
  Vec u;
  double residual_norm = 0.0;
  int iterations = 0;
  /// Distance of u inside the box [-ln(1+eta)/2, 0]; negative outside.
  double box_margin = 0.0;
};

inline double admissibility_bound(double eta) { return eta / ((1.0 + eta) * (1.0 + eta)); }

inline double gauss_lower_bound(double eta) { return -0.5 * std::log1p(eta); }

/// e^{2u} - 1 + e^{-2u} f written as (x^2 - x + f)/x with x = e^{2u}, which
/// keeps relative accuracy near the double root x = 1/2, f = 1/4.
inline Vec gauss_rhs(const Vec& u, const Vec& f) {
  Vec r(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double x = std::exp(2.0 * u[i]);
    r[i] = std::fma(x, x - 1.0, f[i]) / x;
  }
  return r;
}

/// d/du of the right-hand side: 2 e^{2u} - 2 e^{-2u} f.
inline Vec gauss_rhs_derivative(const Vec& u, const Vec& f) {
  Vec d(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double x = std::exp(2.0 * u[i]);
    d[i] = 2.0 * (x - f[i] / x);
  }
  return d;
}

inline Vec gauss_residual_vector(const DiscreteLaplacian& lap, const Vec& u, const Vec& f) {
  return lap.apply(u).cwiseQuotient(lap.mass()) - gauss_rhs(u, f);
}

/// || M^-1 L u - (e^{2u} - 1 + e^{-2u} f) ||_inf
inline double gauss_residual(const DiscreteLaplacian& lap, const Vec& u, const Vec& f) {
  return gauss_residual_vector(lap, u, f).lpNorm<Eigen::Infinity>();
}

inline void check_gauss_problem(const DiscreteLaplacian& lap, const GaussProblem& p) {
  if (p.f.size() != lap.size()) throw MeshMismatch("f does not match the mesh");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) throw DomainError("eta must lie in (0, 1]");
  if (!(p.tol > 0.0)) throw DomainError("tolerance must be positive");
  const double bound = admissibility_bound(p.eta);
  for (Eigen::Index i = 0; i < p.f.size(); ++i) {
    if (!(p.f[i] >= 0.0)) throw AdmissibilityError("f must be nonnegative");
    if (p.f[i] > bound)
      throw AdmissibilityError("f exceeds eta/(1+eta)^2 at vertex " + std::to_string(i) +
                               ": the Gauss equation's admissibility hypothesis fails");
  }
}

inline double gauss_box_margin(const Vec& u, double eta) {
  return std::min(-u.maxCoeff(), u.minCoeff() - gauss_lower_bound(eta));
}

/// Damped Newton on L u - M RHS(u), starting from u0 (default 0). Trial
/// points must stay within the box inflated by 0.1.
inline GaussSolution solve_gauss(const DiscreteLaplacian& lap, const GaussProblem& p,
                                 const Vec* u0 = nullptr) {
  check_gauss_problem(lap, p);
  const Vec& M = lap.mass();
  const double lo = gauss_lower_bound(p.eta) - 0.1, hi = 0.1;
  Vec u = u0 ? *u0 : Vec::Zero(lap.size());
  if (u.size() != lap.size()) throw MeshMismatch("initial guess does not match the mesh");

  auto merit = [&](const Vec& r) { return 0.5 * r.dot(M.cwiseProduct(r)); };
  Vec r = gauss_residual_vector(lap, u, p.f);
  double phi = merit(r);
  double last_step = std::numeric_limits<double>::infinity();
  const SpMat negL = -lap.L();
  Eigen::SimplicialLDLT<SpMat> ldlt;
  ldlt.analyzePattern(negL);

  for (int it = 1; it <= p.max_newton; ++it) {
    SpMat J = negL;
    const Vec D = gauss_rhs_derivative(u, p.f);
    for (Eigen::Index i = 0; i < u.size(); ++i) J.coeffRef(i, i) += M[i] * D[i];
    ldlt.factorize(J);
    if (ldlt.info() != Eigen::Success) throw SingularJacobian("Gauss Newton Jacobian is singular");
    const Vec delta = ldlt.solve(M.cwiseProduct(r));
    if (!delta.allFinite()) throw SingularJacobian("Gauss Newton step is not finite");

    double s = 1.0;
    Vec trial;
    Vec rt;
    double phit = 0.0;
    for (;;) {
      trial = u + s * delta;
      if (trial.minCoeff() >= lo && trial.maxCoeff() <= hi) {
        rt = gauss_residual_vector(lap, trial, p.f);
        phit = merit(rt);
        if (phit <= (1.0 - 1e-4 * s) * phi || phit == 0.0) break;
      }
      s *= 0.5;
      if (s < 1e-12) break;
    }
    if (s < 1e-12) {
      // No decrease left at rounding level: accept only if already converged.
      const double res = r.lpNorm<Eigen::Infinity>();
      if (res <= p.tol) return {u, res, it - 1, gauss_box_margin(u, p.eta)};
      throw NonConvergence("Gauss Newton line search stalled");
    }
    const double step = s * delta.lpNorm<Eigen::Infinity>();
    u = trial;
    r = rt;
    phi = phit;

    const double res = r.lpNorm<Eigen::Infinity>();
    // Past the residual test keep going while steps still shrink, so the
    // linearly convergent degenerate case also reaches full accuracy.
    if (res <= p.tol && (step <= 1e-13 || step > 0.7 * last_step))
      return {u, res, it, gauss_box_margin(u, p.eta)};
    last_step = step;
  }
  const double res = r.lpNorm<Eigen::Infinity>();
  if (res > p.tol) throw NonConvergence("Gauss Newton did not converge");
  return {u, res, p.max_newton, gauss_box_margin(u, p.eta)};
}

/// Monotone iteration (L - 4M) u_{k+1} = M (RHS(u_k) - 4 u_k) from u_0 = 0.
/// `observer` sees every iterate.
inline GaussSolution monotone_solve_gauss(const DiscreteLaplacian& lap, const GaussProblem& p,
                                          const std::function<void(const Vec&)>& observer = {}) {
  check_gauss_problem(lap, p);
  constexpr double lambda = 4.0;
  const Vec& M = lap.mass();
  SpMat A = -lap.L();
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += lambda * M[i];
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw LinearSolveError("monotone operator factorization failed");
  Vec u = Vec::Zero(lap.size());
  if (observer) observer(u);
  for (int it = 1; it <= p.max_monotone; ++it) {
    const Vec b = M.cwiseProduct(lambda * u - gauss_rhs(u, p.f));
    u = ldlt.solve(b);
    if (observer) observer(u);
    const double res = gauss_residual(lap, u, p.f);
    if (res <= p.tol) return {u, res, it, gauss_box_margin(u, p.eta)};
  }
  throw NonConvergence("monotone Gauss iteration did not converge");
}

struct GaussStabilityReport {
  double min_eigenvalue = 0.0;
  /// min over vertices of e^{2u} - e^{-2u} f
  double min_pointwise = 0.0;
  std::vector<double> scales;
  std::vector<double> ratios;  // ||du||_inf / ||df||_inf per scale
};

/// Lowest eigenvalue of (-L + 2M diag(e^{2u} - e^{-2u} f)) x = mu M x and the
/// response of the solution to small random perturbations of f.
inline GaussStabilityReport gauss_stability_probe(const DiscreteLaplacian& lap,
                                                  const GaussProblem& p, const Vec& u,
                                                  const std::vector<double>& scales,
                                                  std::uint64_t seed = 0) {
  GaussStabilityReport rep;
  const Vec D = 0.5 * gauss_rhs_derivative(u, p.f);
  rep.min_pointwise = D.minCoeff();
  SpMat K = -lap.L();
  for (Eigen::Index i = 0; i < K.rows(); ++i) K.coeffRef(i, i) += 2.0 * lap.mass()[i] * D[i];
  rep.min_eigenvalue = shift_invert_eigs(K, lap.mass(), -1.0, 1, seed).values[0];

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec xi(lap.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = unif(rng);
  const double bound = admissibility_bound(p.eta);
  for (double s : scales) {
    GaussProblem q = p;
    for (Eigen::Index i = 0; i < xi.size(); ++i) q.f[i] = std::clamp(p.f[i] + s * xi[i], 0.0, bound);
    const double df = (q.f - p.f).lpNorm<Eigen::Infinity>();
    const GaussSolution sol = solve_gauss(lap, q, &u);
    rep.scales.push_back(s);
    rep.ratios.push_back(df > 0.0 ? (sol.u - u).lpNorm<Eigen::Infinity>() / df : 0.0);
  }
  return rep;
}

}  // namespace toda
