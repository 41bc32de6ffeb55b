#pragma once

// Bottom of the spectrum of -L w = lambda M w plus the systole.

#include <cstdint>

#include "toda/eigensolver.hpp"
#include "toda/laplacian.hpp"
#include "toda/systole.hpp"

namespace toda {

struct SpectralReport {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double systole = 0.0;
  double volume = 0.0;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

/// Lowest `k` eigenvalues of -L w = lambda M w, ascending.
inline EigenResult lowest_eigenpairs(const DiscreteLaplacian& lap, int k, std::uint64_t seed,
                                     double tol = 1e-9) {
  const SpMat K = -lap.L();
  // Shift just below zero keeps K - sigma M definite.
  EigenResult r = shift_invert_eigs(K, lap.mass(), -0.5, k, seed, tol);
  return r;
}

inline SpectralReport spectral_gap(const HyperbolicMesh& mesh, std::uint64_t seed = 0,
                                   double tol = 1e-9) {
  const DiscreteLaplacian lap(mesh);
  const EigenResult r = lowest_eigenpairs(lap, 2, seed, tol);
  SpectralReport rep;
  rep.lambda0 = r.values[0];
  rep.lambda1 = r.values[1];
  rep.systole = systole(mesh);
  rep.volume = mesh.volume();
  rep.tol = tol;
  rep.seed = seed;
  if (!(rep.lambda1 > 0.0)) throw EigenSolverError("spectral gap is not positive");
  return rep;
}

}  // namespace toda
