#pragma once

// Generalized symmetric eigenproblems K x = lambda M x with diagonal M.
// The sparse route is shift-invert block subspace iteration with
// Rayleigh-Ritz; the dense route is used for small problems and as a check.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "toda/errors.hpp"
#include "toda/laplacian.hpp"

namespace toda {

struct EigenResult {
  Vec values;              // sorted by distance to the shift
  Eigen::MatrixXd vectors; // M-orthonormal columns
  int iterations = 0;
  double max_residual = 0.0;
};

/// The k eigenpairs of K x = lambda M x closest to `sigma`.
/// Residuals are measured as ||K x - lambda M x||_{M^-1} / max(1, |lambda|).
inline EigenResult shift_invert_eigs(const SpMat& K, const Vec& mass, double sigma, int k,
                                     std::uint64_t seed, double tol = 1e-9,
                                     int max_iter = 5000) {
  const Eigen::Index n = K.rows();
  if (k < 1 || k > n) throw EigenSolverError("requested eigenpair count out of range");
  const int p = static_cast<int>(std::min<Eigen::Index>(n, std::max(2 * k, k + 8)));

  SpMat shifted = K;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * mass[i];
  shifted.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw EigenSolverError("shifted operator factorization failed");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);

  const Vec inv_mass = mass.cwiseInverse();
  EigenResult res;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd Y = lu.solve(mass.asDiagonal() * X);
    if (lu.info() != Eigen::Success) throw EigenSolverError("shift-invert solve failed");
    const Eigen::MatrixXd KY = K * Y;
    Eigen::MatrixXd Kp = Y.transpose() * KY;
    Eigen::MatrixXd Mp = Y.transpose() * mass.asDiagonal() * Y;
    Kp = 0.5 * (Kp + Kp.transpose()).eval();
    Mp = 0.5 * (Mp + Mp.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Kp, Mp);
    if (ritz.info() != Eigen::Success) throw EigenSolverError("Rayleigh-Ritz step failed");

    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    const Vec theta = ritz.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(theta[a] - sigma) < std::abs(theta[b] - sigma);
    });
    Eigen::MatrixXd V(p, p);
    Vec th(p);
    for (int j = 0; j < p; ++j) {
      V.col(j) = ritz.eigenvectors().col(order[j]);
      th[j] = theta[order[j]];
    }
    X = Y * V;
    const Eigen::MatrixXd KX = KY * V;

    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      const Vec r = KX.col(j) - th[j] * (mass.asDiagonal() * X.col(j));
      const double rn = std::sqrt(r.dot(inv_mass.asDiagonal() * r));
      worst = std::max(worst, rn / std::max(1.0, std::abs(th[j])));
    }
    if (worst <= tol) {
      res.values = th.head(k);
      res.vectors = X.leftCols(k);
      res.iterations = it;
      res.max_residual = worst;
      return res;
    }
  }
  throw EigenSolverError("shift-invert subspace iteration did not converge");
}

/// All eigenvalues (ascending) and M-orthonormal eigenvectors of a dense
/// symmetric K with diagonal M, via the congruence M^-1/2 K M^-1/2.
inline EigenResult dense_generalized_eigs(const Eigen::MatrixXd& K, const Vec& mass) {
  const Vec s = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = s.asDiagonal() * K * s.asDiagonal();
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw EigenSolverError("dense eigensolver failed");
  EigenResult r;
  r.values = es.eigenvalues();
  r.vectors = s.asDiagonal() * es.eigenvectors();
  return r;
}

/// Number of eigenvalues of K x = lambda M x strictly below sigma, read off
/// the inertia of K - sigma M (Sylvester's law).
inline int count_eigenvalues_below(const SpMat& K, const Vec& mass, double sigma) {
  SpMat shifted = K;
  for (Eigen::Index i = 0; i < K.rows(); ++i) shifted.coeffRef(i, i) -= sigma * mass[i];
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw EigenSolverError("LDLT factorization failed");
  const Vec d = ldlt.vectorD();
  int neg = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) throw EigenSolverError("shift coincides with an eigenvalue");
    if (d[i] < 0.0) ++neg;
  }
  return neg;
}

}  // namespace toda
