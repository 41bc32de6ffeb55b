#pragma once

// Empirical Moser-Trudinger constant: max of int (e^{4 pi w^2} - 1) over
// random smooth zero-mean fields with unit Dirichlet energy.

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "toda/errors.hpp"
#include "toda/laplacian.hpp"

namespace toda {

struct MTProbeReport {
  std::vector<double> values;  // per sample, in generation order
  double max_value = 0.0;
};

inline double moser_trudinger_integral(const DiscreteLaplacian& lap, const Vec& w) {
  const double four_pi = 4.0 * std::numbers::pi;
  return lap.mass().dot((four_pi * w.array().square()).exp().matrix() - Vec::Ones(w.size()));
}

/// Samples are white noise smoothed twice by (M - L)^{-1} M, projected to
/// zero mean, and scaled to unit Dirichlet energy. Sample k only depends
/// on the seed and k, so longer runs extend shorter ones.
inline MTProbeReport mt_probe(const DiscreteLaplacian& lap, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("mt_probe needs at least one sample");
  SpMat A = -lap.L();
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += lap.mass()[i];
  Eigen::SimplicialLDLT<SpMat> smoother(A);
  if (smoother.info() != Eigen::Success) throw LinearSolveError("smoother factorization failed");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MTProbeReport rep;
  for (int k = 0; k < samples; ++k) {
    Vec xi(lap.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = normal(rng);
    Vec w = smoother.solve(lap.mass().cwiseProduct(xi));
    w = smoother.solve(lap.mass().cwiseProduct(w));
    w = lap.project_zero_mean(w);
    const double energy = lap.dirichlet_energy(w);
    if (!(energy > 0.0)) continue;
    w /= std::sqrt(energy);
    const double val = moser_trudinger_integral(lap, w);
    rep.values.push_back(val);
    rep.max_value = std::max(rep.max_value, val);
  }
  return rep;
}

}  // namespace toda
