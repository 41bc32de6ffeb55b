#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "toda/toda.hpp"

using namespace toda;

namespace {

constexpr double kPi = std::numbers::pi;

const HyperbolicMesh& bolza(int level) {
  static std::deque<HyperbolicMesh> cache;  // stable references
  while (static_cast<int>(cache.size()) <= level)
    cache.push_back(cache.empty() ? build_base_surface(0) : refine(cache.back()));
  return cache[level];
}

Vec random_vec(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec x(n);
  for (auto& xi : x) xi = g(rng);
  return x;
}

// Dense oracle: all eigenvalues of -L w = lambda M w.
Vec dense_spectrum(const DiscreteLaplacian& lap) {
  return dense_generalized_eigs(Eigen::MatrixXd(-lap.L()), lap.mass()).values;
}

}  // namespace

TEST(Bolza, LevelZeroCounts) {
  const auto& m = bolza(0);
  EXPECT_EQ(m.vertex_count(), 2);
  EXPECT_EQ(m.edge_count(), 12);
  EXPECT_EQ(m.triangle_count(), 8);
  EXPECT_EQ(m.euler_characteristic(), -2);
  EXPECT_EQ(m.genus, 2);
}

TEST(Bolza, LevelZeroAreaFromAngleDefects) {
  const auto& m = bolza(0);
  double area = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto g = m.corner_geometry(t);
    area += kPi - g.angle[0] - g.angle[1] - g.angle[2];
  }
  EXPECT_NEAR(area, 4.0 * kPi, 1e-9);
  EXPECT_NEAR(m.volume(), 4.0 * kPi, 1e-9);
}

TEST(Bolza, OctagonCornerAnglesArePiOverFour) {
  // the 8 corners at vertex 1 of the coned octagon fill 2 pi, 8 * pi/4
  const auto& m = bolza(0);
  double at_corner = 0.0, at_centre = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto g = m.corner_geometry(t);
    for (int c = 0; c < 3; ++c) (m.triangles[t][c] == 0 ? at_centre : at_corner) += g.angle[c];
  }
  EXPECT_NEAR(at_centre, 2.0 * kPi, 1e-12);
  EXPECT_NEAR(at_corner, 2.0 * kPi, 1e-12);
}

TEST(Bolza, RefinementCombinatorics) {
  for (int k = 0; k < 4; ++k) {
    const auto& a = bolza(k);
    const auto& b = bolza(k + 1);
    EXPECT_EQ(b.vertex_count(), a.vertex_count() + a.edge_count());
    EXPECT_EQ(b.edge_count(), 2 * a.edge_count() + 3 * a.triangle_count());
    EXPECT_EQ(b.triangle_count(), 4 * a.triangle_count());
    EXPECT_EQ(b.euler_characteristic(), -2);
    EXPECT_EQ(b.genus, 2);
    EXPECT_EQ(b.level, k + 1);
  }
  EXPECT_EQ(bolza(1).vertex_count(), 14);
  EXPECT_EQ(bolza(1).edge_count(), 48);
  EXPECT_EQ(bolza(1).triangle_count(), 32);
}

TEST(Bolza, AreaErrorDoesNotGrow) {
  // Geodesic subdivision preserves area exactly, so only rounding moves it.
  double prev = std::abs(bolza(0).volume() - 4.0 * kPi);
  for (int k = 1; k <= 3; ++k) {
    const double err = std::abs(bolza(k).volume() - 4.0 * kPi);
    EXPECT_LE(err, prev + 1e-12) << "level " << k;
    prev = err;
  }
}

TEST(Bolza, TriangleInequalityAndAnglesInRange) {
  for (int k = 0; k <= 3; ++k) {
    const auto& m = bolza(k);
    for (int t = 0; t < m.triangle_count(); ++t) {
      const auto l = m.side_lengths(t);
      EXPECT_TRUE(hyperbolic_triangle_inequality(l[0], l[1], l[2]));
      const auto g = m.corner_geometry(t);
      for (double a : g.angle) {
        EXPECT_GT(a, 0.0);
        EXPECT_LT(a, kPi);
      }
    }
  }
}

TEST(Bolza, VertexAreasSumToTriangleAreas) {
  const auto& m = bolza(3);
  double va = 0.0, ta = 0.0;
  for (double a : m.vertex_areas) va += a;
  for (double a : m.triangle_areas) ta += a;
  EXPECT_NEAR(va, ta, 1e-12);
  for (double a : m.vertex_areas) EXPECT_GT(a, 0.0);
}

TEST(Bolza, TriangleBoundaryHolonomyIsIdentity) {
  for (int k = 0; k <= 3; ++k) {
    const auto& m = bolza(k);
    for (int t = 0; t < m.triangle_count(); ++t) {
      const Mobius g = m.boundary_holonomy(t);
      EXPECT_LT(std::abs(g.b), 1e-9);
      EXPECT_LT(std::abs(std::abs(g.a) - 1.0), 1e-9);
      EXPECT_LT(std::arg(g.a * g.a), 1e-9);
    }
  }
}

TEST(Bolza, EdgeLengthsMatchDevelopedCorners) {
  const auto& m = bolza(2);
  for (int t = 0; t < m.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k)
      EXPECT_NEAR(m.edges[m.triangle_edges[t][k]].length,
                  disk_distance(m.corner_positions[t][k], m.corner_positions[t][(k + 1) % 3]), 1e-10);
}

TEST(SurfaceGroup, StandardGeneratorsSatisfyRelator) {
  EXPECT_TRUE(is_identity_element(evaluate(surface_relator())));
  for (int k = 0; k < 4; ++k) {
    const Mobius a = octagon::side_pairing(k);
    const Mobius b = evaluate(octagon::side_pairing_word(k));
    EXPECT_TRUE(is_identity_element(a * b.inverse()));
  }
}

TEST(SurfaceGroup, WordReductionAndParsing) {
  EXPECT_EQ(Word::parse("a1A1").str(), "e");
  EXPECT_EQ(Word::parse("A2b1a1").inverse().str(), "A1B1a2");
  EXPECT_EQ((Word::parse("a1b1") * Word::parse("B1a2")).str(), "a1a2");
}

TEST(Cover, IdentityCoverIsIsomorphic) {
  const auto& base = bolza(2);
  const auto c = build_cover(base, CoverSpec::cyclic(1));
  EXPECT_EQ(c.vertex_count(), base.vertex_count());
  EXPECT_EQ(c.edge_count(), base.edge_count());
  EXPECT_EQ(c.triangles, base.triangles);
  for (int e = 0; e < base.edge_count(); ++e) EXPECT_EQ(c.edges[e].length, base.edges[e].length);
  EXPECT_EQ(c.genus, 2);
}

TEST(Cover, CyclicCoverGenusAndEuler) {
  for (int n = 2; n <= 4; ++n) {
    const auto c = build_cover(bolza(1), CoverSpec::cyclic(n));
    EXPECT_EQ(c.genus, n + 1);
    EXPECT_EQ(c.euler_characteristic(), -2 * n);
    EXPECT_NEAR(c.volume(), n * bolza(1).volume(), 1e-10 * n);
  }
  const auto c3 = build_cover(bolza(0), CoverSpec::cyclic(3));
  EXPECT_EQ(c3.genus, 4);
  EXPECT_EQ(c3.euler_characteristic(), -6);
}

TEST(Cover, RelatorAndTransitivityChecks) {
  CoverSpec bad = CoverSpec::cyclic(3);
  bad.generator_images[1] = {1, 0, 2};  // a1 and b1 no longer commute: relator fails
  EXPECT_THROW(build_cover(bolza(0), bad), RelatorError);
  CoverSpec split;
  split.degree = 2;
  for (auto& g : split.generator_images) g = identity_permutation(2);
  EXPECT_THROW(build_cover(bolza(0), split), DisconnectedCover);
}

TEST(Cover, NonAbelianCoverPassesRelator) {
  // a1 -> x, b1 -> y, a2 -> y, b2 -> x gives [x,y][y,x] = 1 for any x, y
  CoverSpec s;
  s.degree = 3;
  s.generator_images = {Permutation{1, 2, 0}, Permutation{1, 0, 2}, Permutation{1, 0, 2},
                        Permutation{1, 2, 0}};
  EXPECT_TRUE(s.relator_holds());
  EXPECT_NE(compose(s.generator_images[0], s.generator_images[1]),
            compose(s.generator_images[1], s.generator_images[0]));
  const auto c = build_cover(bolza(1), s);
  EXPECT_EQ(c.genus, 4);
  EXPECT_EQ(c.euler_characteristic(), -6);
  EXPECT_NEAR(c.volume(), 3.0 * bolza(1).volume(), 1e-10);
}

TEST(Cover, LiftCommutesWithLaplacian) {
  const auto& base = bolza(2);
  const auto c = build_cover(base, CoverSpec::cyclic(3));
  const DiscreteLaplacian bl(base), cl(c);
  const Vec f = random_vec(base.vertex_count(), 7);
  const Vec lifted = to_vec(lift_field(c, to_std(f)));
  const Vec a = cl.apply(lifted);
  const Vec b = to_vec(lift_field(c, to_std(bl.apply(f))));
  EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-12);
  const Vec ma = to_vec(lift_field(c, to_std(bl.mass())));
  EXPECT_LT((ma - cl.mass()).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Laplacian, RowSumsSymmetryAndSign) {
  const auto& m = bolza(3);
  const DiscreteLaplacian lap(m);
  EXPECT_LT(lap.apply(Vec::Ones(lap.size())).lpNorm<Eigen::Infinity>(), 1e-12);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vec f = random_vec(lap.size(), 2 * s), g = random_vec(lap.size(), 2 * s + 1);
    EXPECT_NEAR(g.dot(lap.L() * f), f.dot(lap.L() * g), 1e-10 * (1.0 + std::abs(g.dot(lap.L() * f))));
    EXPECT_GE(-f.dot(lap.L() * f), 0.0);
    EXPECT_NEAR(g.dot(lap.L() * f) + lap.dirichlet_pairing(f, g), 0.0, 1e-10 * (1.0 + std::abs(lap.dirichlet_pairing(f, g))));
  }
  EXPECT_NEAR(lap.volume(), m.volume(), 1e-12);
}

TEST(Spectrum, LowestEigenvaluesMatchDenseOracle) {
  const auto& m = bolza(2);
  const DiscreteLaplacian lap(m);
  const Vec dense = dense_spectrum(lap);
  const EigenResult r = lowest_eigenpairs(lap, 6, 0);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.values[i], dense[i], 1e-9 * (1.0 + dense[i]));
  const SpectralReport rep = spectral_gap(m);
  EXPECT_LE(std::abs(rep.lambda0), 1e-10);
  EXPECT_GT(rep.lambda1, 0.0);
  EXPECT_GT(rep.systole, 0.0);
  EXPECT_NEAR(rep.volume, 4.0 * kPi, 1e-9);
}

TEST(Spectrum, InertiaCountAgreesWithIterativeSolver) {
  const DiscreteLaplacian lap(bolza(3));
  const EigenResult r = lowest_eigenpairs(lap, 8, 0);
  const double mid = 0.5 * (r.values[3] + r.values[4]);
  if (r.values[4] - r.values[3] > 1e-6) EXPECT_EQ(count_eigenvalues_below(-lap.L(), lap.mass(), mid), 4);
}

TEST(Spectrum, GapIsCauchyUnderRefinement) {
  const double l2 = spectral_gap(bolza(2)).lambda1;
  const double l3 = spectral_gap(bolza(3)).lambda1;
  const double l4 = spectral_gap(bolza(4)).lambda1;
  EXPECT_LT(std::abs(l4 - l3), std::abs(l3 - l2));
}

TEST(Spectrum, PoincareInequality) {
  const DiscreteLaplacian lap(bolza(3));
  const double l1 = lowest_eigenpairs(lap, 2, 0).values[1];
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vec w = lap.project_zero_mean(random_vec(lap.size(), 100 + s));
    EXPECT_LE(w.dot(lap.mass().cwiseProduct(w)), (1.0 / l1) * (-w.dot(lap.L() * w)) * (1.0 + 1e-9));
  }
}

TEST(Spectrum, BaseEigenvaluesEmbedInCoverSpectrum) {
  const auto& base = bolza(2);
  const auto c = build_cover(base, CoverSpec::cyclic(3));
  const DiscreteLaplacian bl(base), cl(c);
  const EigenResult be = lowest_eigenpairs(bl, 4, 0);
  const Vec cover_dense = dense_spectrum(cl);
  for (int i = 0; i < 4; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (double mu : cover_dense) best = std::min(best, std::abs(mu - be.values[i]));
    EXPECT_LT(best, 1e-6);
    // lifted eigenfunction has the same Rayleigh quotient
    const Vec phi = to_vec(lift_field(c, to_std(be.vectors.col(i))));
    const double rq = -phi.dot(cl.L() * phi) / phi.dot(cl.mass().cwiseProduct(phi));
    EXPECT_NEAR(rq, be.values[i], 1e-8);
  }
}

TEST(Spectrum, ReproducibleForFixedSeed) {
  const auto c = build_cover(bolza(2), CoverSpec::cyclic(2));
  const SpectralReport a = spectral_gap(c, 3), b = spectral_gap(c, 3);
  EXPECT_EQ(a.lambda1, b.lambda1);
  EXPECT_EQ(a.systole, b.systole);
}

TEST(Systole, MatchesWordSearchOracle) {
  const double oracle = shortest_geodesic_by_words(4);
  EXPECT_NEAR(oracle, 2.0 * std::acosh(1.0 + std::numbers::sqrt2), 1e-10);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 3; ++k) {
    const double s = systole(bolza(k));
    EXPECT_GE(s, oracle - 1e-9);  // edge loops bound the systole from above
    EXPECT_LE(s, prev + 1e-12);
    prev = s;
  }
}

TEST(Systole, NondecreasingUnderCyclicCovers) {
  const auto& base = bolza(2);
  const double sb = systole(base);
  for (int n = 2; n <= 3; ++n) EXPECT_GE(systole(build_cover(base, CoverSpec::cyclic(n))), sb - 1e-9);
}

TEST(Systole, ContractibleLoopsAreRejected) {
  // every returned loop is nontrivial, so it is at least the true systole,
  // while the shortest edge loop of all (a triangle boundary) is shorter
  const auto& m = bolza(3);
  double tri = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m.triangle_count(); ++t) {
    const auto l = m.side_lengths(t);
    tri = std::min(tri, l[0] + l[1] + l[2]);
  }
  EXPECT_LT(tri, systole(m));
  EXPECT_GE(systole(m), shortest_geodesic_by_words(4) - 1e-9);
}

TEST(Develop, DistancesMatchGeodesicFormula) {
  // developed distance from the octagon centre to a corner is the circumradius
  const auto& m = bolza(2);
  const auto d = developed_distances(m, 0, 3.0);
  EXPECT_NEAR(d[1], octagon::circumradius(), 1e-12);
  EXPECT_EQ(d[0], 0.0);
}
