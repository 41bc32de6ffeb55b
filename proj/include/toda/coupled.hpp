#pragma once

// Fixed-point driver for the coupled Gauss-Ricci system with beta = 0:
//   u_{k+1} = (1 - theta) u_k + theta Phi(e^{2 Psi(u_k)} |alpha|^2),  u_0 = 0,
// where Psi solves the Ricci equation for v and Phi the Gauss equation for u.
// The certificate records sup e^{-4u} e^{2v} |alpha|^2 and residuals.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "toda/errors.hpp"
#include "toda/gauss.hpp"
#include "toda/laplacian.hpp"
#include "toda/mesh.hpp"
#include "toda/ricci.hpp"
#include "toda/sections.hpp"

namespace toda {

/// 0 <= d <= 2g - 2.
inline bool degree_bound_check(int d, int g) { return d >= 0 && d <= 2 * g - 2; }

struct CoupledConfig {
  double eta = 0.5;
  double damping = 1.0;
  int max_outer_iters = 100;
  double tol_outer = 1e-8;
  int degree = 1;         // degree of the normal bundle
  double scale = 1.0;     // density rescaling t, |alpha|^2 -> t |alpha|^2
  double gauss_tol = 1e-10;
  double ricci_tol = 1e-9;
  int variational_every = 10;

  void validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
    if (!(scale > 0.0)) throw DomainError("density scale must be positive");
    if (max_outer_iters < 1) throw DomainError("max_outer_iters must be >= 1");
    if (!(tol_outer > 0.0)) throw DomainError("tol_outer must be positive");
  }
};

struct AFCertificate {
  double sup_af = 0.0;
  double gauss_residual = 0.0;
  double ricci_residual = 0.0;
  double mean_residual = 0.0;
  bool converged = false;
  bool almost_fuchsian = false;
  int outer_iters = 0;
  double t = 1.0;
  double eta = 0.5;
  int degree = 0;
  int density_degree = 0;
  int genus = 0;
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  double systole = std::numeric_limits<double>::quiet_NaN();
  /// eta/(1+eta)^2 - sup e^{2v}|alpha|^2 (Gauss data margin)
  double admissibility_margin = 0.0;
  /// sup e^{2v}|alpha|^2 and sup e^{-2u}, whose product bounds sup_af
  double sup_gauss_data = 0.0;
  double sup_exp_minus_2u = 0.0;
};

struct CoupledResult {
  Vec u;
  Vec v;
  AFCertificate certificate;
  std::vector<double> increments;  // ||u_{k+1} - u_k||_inf per outer iteration
  std::vector<double> thetas;
};

inline SectionDensity scaled_density(const SectionDensity& d, double t) {
  SectionDensity s = d;
  if (!s.identically_zero()) s.log_density.array() += std::log(t);
  return s;
}

/// Recomputes residuals and the almost-Fuchsian supremum from (u, v, density).
/// `density` is the density entering the equations (after any rescaling).
inline AFCertificate certify(const HyperbolicMesh& mesh, const DiscreteLaplacian& lap,
                             const Vec& u, const Vec& v, const SectionDensity& density,
                             double eta, int degree, double tol = 1e-7) {
  if (u.size() != lap.size() || v.size() != lap.size())
    throw MeshMismatch("fields do not match the mesh");
  AFCertificate c;
  c.eta = eta;
  c.degree = degree;
  c.density_degree = density.degree;
  c.genus = mesh.genus;
  const double cc = curvature_constant(degree, lap.volume());
  Vec f;
  if (density.identically_zero()) {
    f = Vec::Zero(lap.size());
    c.sup_af = 0.0;
  } else {
    f = exp_field(density.log_density + 2.0 * v);
    c.sup_af = exp_field(density.log_density + 2.0 * v - 4.0 * u).maxCoeff();
  }
  c.sup_gauss_data = f.maxCoeff();
  c.sup_exp_minus_2u = std::exp(-2.0 * u.minCoeff());
  c.admissibility_margin = admissibility_bound(eta) - c.sup_gauss_data;
  c.gauss_residual = gauss_residual(lap, u, f);
  c.ricci_residual = ricci_residual(lap, u, v, density, cc);
  c.mean_residual = density.identically_zero() && degree == 0
                        ? 0.0
                        : ricci_mean_residual(lap, u, v, density, cc);
  c.converged = c.gauss_residual <= tol && c.ricci_residual <= tol;
  c.almost_fuchsian = c.converged && c.sup_af < 1.0;
  return c;
}

namespace detail {

struct RicciStage {
  const DiscreteLaplacian& lap;
  const SectionDensity& density;
  const CoupledConfig& cfg;
  Vec v;
  bool have_v = false;

  Vec solve(const Vec& u, int outer) {
    RicciProblem p = make_ricci_problem(lap, u, density, cfg.degree);
    p.tol = cfg.ricci_tol;
    const bool full = !have_v || (cfg.variational_every > 0 && outer % cfg.variational_every == 0);
    RicciSolution s;
    if (full) {
      s = maximize_J(lap, p);
      // polish on the same branch so both equations are met tightly
      s = solve_ricci_newton(lap, p, s.v);
    } else {
      try {
        s = solve_ricci_newton(lap, p, v);
      } catch (const NonConvergence&) {
        s = solve_ricci_newton(lap, p, maximize_J(lap, p).v);
      } catch (const SingularJacobian&) {
        s = solve_ricci_newton(lap, p, maximize_J(lap, p).v);
      }
    }
    v = s.v;
    have_v = true;
    return v;
  }
};

inline void check_outer_box(const DiscreteLaplacian& lap, const Vec& u, int k) {
  const double lo = -0.5 * std::log(2.0) - 1e-9, hi = 1e-9;
  if (u.minCoeff() < lo || u.maxCoeff() > hi)
    throw AdmissibilityLost("outer iterate " + std::to_string(k) +
                            " left the box -ln2/2 <= u <= 0");
  const double lap_sup = lap.apply(u).cwiseQuotient(lap.mass()).lpNorm<Eigen::Infinity>();
  if (lap_sup > 1.0 + 1e-9)
    throw AdmissibilityLost("outer iterate " + std::to_string(k) + " has |Delta u| > 1");
}

}  // namespace detail

inline CoupledResult solve_coupled(const HyperbolicMesh& mesh, const DiscreteLaplacian& lap,
                                   const SectionDensity& density, const CoupledConfig& cfg) {
  cfg.validate();
  if (!degree_bound_check(cfg.degree, mesh.genus))
    throw DegreeBoundError("normal bundle degree " + std::to_string(cfg.degree) +
                           " violates 0 <= d <= 2g-2 = " + std::to_string(2 * mesh.genus - 2));
  const SectionDensity alpha = scaled_density(density, cfg.scale);
  CoupledResult res;
  if (alpha.identically_zero()) {
    if (cfg.degree > 0)
      throw InfeasibleDegree("alpha vanishes identically with d > 0: integrating the Ricci "
                             "equation gives 0 = c vol");
    res.u = Vec::Zero(lap.size());
    res.v = Vec::Zero(lap.size());
    res.certificate = certify(mesh, lap, res.u, res.v, alpha, cfg.eta, cfg.degree, cfg.tol_outer);
    res.certificate.t = cfg.scale;
    res.certificate.converged = true;
    res.certificate.almost_fuchsian = true;
    return res;
  }
  if (cfg.degree == 0)
    throw InfeasibleDegree("d = 0 with alpha not identically zero: the Ricci equation "
                           "integrates to 0 = int e^{-2u}e^{2v}|alpha|^2 > 0");

  const double bound = admissibility_bound(cfg.eta);
  detail::RicciStage ricci{lap, alpha, cfg, Vec(), false};
  Vec u = Vec::Zero(lap.size());
  Vec v = ricci.solve(u, 0);
  double theta = cfg.damping;
  bool converged = false;
  int k = 0;
  for (; k < cfg.max_outer_iters; ++k) {
    const Vec f = exp_field(alpha.log_density + 2.0 * v);
    if (f.maxCoeff() > bound)
      throw AdmissibilityLost("outer iterate " + std::to_string(k) + ": sup e^{2v}|alpha|^2 = " +
                              std::to_string(f.maxCoeff()) + " exceeds eta/(1+eta)^2 = " +
                              std::to_string(bound) + ", the Gauss admissibility hypothesis");
    GaussProblem gp;
    gp.f = f;
    gp.eta = cfg.eta;
    gp.tol = cfg.gauss_tol;
    const Vec phi = solve_gauss(lap, gp, &u).u;

    // Damped update, halving theta while the next Ricci output is inadmissible.
    Vec u_next, v_next;
    double th = theta;
    for (;;) {
      u_next = (1.0 - th) * u + th * phi;
      detail::check_outer_box(lap, u_next, k + 1);
      v_next = ricci.solve(u_next, k + 1);
      const double sup_next = exp_field(alpha.log_density + 2.0 * v_next).maxCoeff();
      if (sup_next <= bound || th < cfg.damping / 64.0) break;
      th *= 0.5;
    }
    const double inc = (u_next - u).lpNorm<Eigen::Infinity>();
    res.increments.push_back(inc);
    res.thetas.push_back(th);
    u = u_next;
    v = v_next;
    if (inc <= cfg.tol_outer) {
      converged = true;
      ++k;
      break;
    }
  }
  res.u = u;
  res.v = v;
  res.certificate = certify(mesh, lap, u, v, alpha, cfg.eta, cfg.degree, 10.0 * cfg.tol_outer);
  res.certificate.t = cfg.scale;
  res.certificate.outer_iters = k;
  res.certificate.converged = converged && res.certificate.converged;
  res.certificate.almost_fuchsian = res.certificate.converged && res.certificate.sup_af < 1.0;
  if (!converged) throw NonConvergence("coupled iteration did not converge");
  return res;
}

/// Residuals of the full system with both holomorphic components:
///   Delta u = e^{2u} - 1 + e^{-2u}(e^{2v}|alpha|^2 + e^{-2v}|beta|^2)
///   Delta v = c - e^{-2u}(e^{2v}|alpha|^2 - e^{-2v}|beta|^2)
inline std::pair<double, double> full_system_residual(const DiscreteLaplacian& lap, const Vec& u,
                                                      const Vec& v, const Vec& log_alpha,
                                                      const Vec& log_beta, double c) {
  const Vec a = exp_field(log_alpha + 2.0 * v);
  const Vec b = exp_field(log_beta - 2.0 * v);
  const double rg = gauss_residual(lap, u, a + b);
  const Vec ea = exp_field(log_alpha - 2.0 * u + 2.0 * v);
  const Vec eb = exp_field(log_beta - 2.0 * u - 2.0 * v);
  const Vec rr = lap.apply(v).cwiseQuotient(lap.mass()) - (Vec::Constant(v.size(), c) - (ea - eb));
  return {rg, rr.lpNorm<Eigen::Infinity>()};
}

/// min over vertices of max(log|alpha|^2, log|beta|^2); very negative values
/// mean the two densities are nowhere simultaneously large.
inline double superminimality_audit(const Vec& log_alpha, const Vec& log_beta) {
  return log_alpha.cwiseMax(log_beta).minCoeff();
}

}  // namespace toda
