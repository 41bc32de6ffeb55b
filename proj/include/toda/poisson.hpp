#pragma once

// Zero-mean Poisson solves L x = b on a closed surface. The singular system
// is made definite by pinning vertex 0, and the M-mean is removed afterwards.

#include <Eigen/SparseCholesky>
#include <cmath>

#include "toda/errors.hpp"
#include "toda/laplacian.hpp"

namespace toda {

class PoissonSolver {
 public:
  explicit PoissonSolver(const DiscreteLaplacian& lap) : lap_(&lap) {
    SpMat A = -lap.L();
    A.prune([](Eigen::Index i, Eigen::Index j, double) { return i != 0 && j != 0; });
    A.coeffRef(0, 0) = 1.0;
    A.makeCompressed();
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success) throw LinearSolveError("Poisson factorization failed");
  }

  /// Solves L x = b for b with zero sum; the zero-sum part of b is used.
  Vec solve(const Vec& b) const {
    const Vec& M = lap_->mass();
    Vec rhs = -(b - M * (b.sum() / lap_->volume()));
    rhs[0] = 0.0;
    Vec x = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success) throw LinearSolveError("Poisson solve failed");
    // one step of iterative refinement
    const Vec r = -(b - M * (b.sum() / lap_->volume())) + lap_->apply(x);
    Vec rr = r;
    rr[0] = 0.0;
    x += ldlt_.solve(rr);
    return lap_->project_zero_mean(x);
  }

  const DiscreteLaplacian& laplacian() const { return *lap_; }

 private:
  const DiscreteLaplacian* lap_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

/// Zero-mean G with L G = e_z - M 1 / vol.
inline Vec green_function(const PoissonSolver& solver, int z) {
  const DiscreteLaplacian& lap = solver.laplacian();
  if (z < 0 || z >= lap.size()) throw DomainError("source vertex out of range");
  Vec b = -lap.mass() / lap.volume();
  b[z] += 1.0;
  return solver.solve(b);
}

}  // namespace toda
