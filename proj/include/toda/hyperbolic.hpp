#pragma once

// Poincare-disk primitives: SU(1,1) isometries, distances, geodesic midpoints,
// and the trigonometry of geodesic triangles given by their side lengths.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "toda/errors.hpp"

namespace toda {

using Complex = std::complex<double>;

/// Orientation-preserving isometry of the unit disk,
///   z -> (a z + b) / (conj(b) z + conj(a)),  |a|^2 - |b|^2 = 1.
struct Mobius {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  static Mobius identity() { return {}; }

  static Mobius rotation(double theta) {
    return {std::polar(1.0, 0.5 * theta), Complex{0.0, 0.0}};
  }

  /// Isometry sending `z0` to the origin, fixing the diameter through it.
  static Mobius recentre(Complex z0) {
    const double s = 1.0 / std::sqrt(1.0 - std::norm(z0));
    return {Complex{s, 0.0}, -s * z0};
  }

  Complex operator()(Complex z) const {
    return (a * z + b) / (std::conj(b) * z + std::conj(a));
  }

  Mobius inverse() const { return {std::conj(a), -b}; }

  friend Mobius operator*(const Mobius& x, const Mobius& y) {
    return {x.a * y.a + x.b * std::conj(y.b), x.a * y.b + x.b * std::conj(y.a)};
  }

  /// Real trace of the SU(1,1) matrix. |trace| = 2 exactly for the identity.
  double trace() const { return 2.0 * a.real(); }

  /// Translation length of a hyperbolic element; 0 for elliptic/identity.
  double translation_length() const {
    const double half = std::abs(a.real());
    return half > 1.0 ? 2.0 * std::acosh(half) : 0.0;
  }
};

/// Hyperbolic distance in the disk (curvature -1).
inline double disk_distance(Complex z, Complex w) {
  const double r = std::abs(z - w) / std::abs(1.0 - std::conj(z) * w);
  return 2.0 * std::atanh(r);
}

/// Point of the geodesic segment [z, w] at hyperbolic distance `s * d(z,w)`
/// from z.
inline Complex disk_geodesic_point(Complex z, Complex w, double s) {
  const Mobius to0 = Mobius::recentre(z);
  const Complex w0 = to0(w);
  const double r = std::abs(w0);
  if (r == 0.0) return z;
  const double rs = std::tanh(s * std::atanh(r));
  return to0.inverse()(w0 * (rs / r));
}

inline Complex disk_midpoint(Complex z, Complex w) {
  return disk_geodesic_point(z, w, 0.5);
}

/// Corner angles of a hyperbolic triangle, angle k opposite side k.
/// Uses the half-angle form, which stays accurate for small triangles.
struct TriangleGeometry {
  std::array<double, 3> angle{};
  std::array<double, 3> cot{};
  double area = 0.0;
};

inline bool hyperbolic_triangle_inequality(double a, double b, double c) {
  return a > 0.0 && b > 0.0 && c > 0.0 && a < b + c && b < a + c && c < a + b;
}

inline TriangleGeometry triangle_geometry(double a, double b, double c) {
  if (!hyperbolic_triangle_inequality(a, b, c))
    throw DegenerateTriangle("side lengths violate the triangle inequality");
  const double s = 0.5 * (a + b + c);
  const std::array<double, 3> len{a, b, c};
  TriangleGeometry tg;
  double angle_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double opp = len[k];
    const double l1 = len[(k + 1) % 3];
    const double l2 = len[(k + 2) % 3];
    // cos^2(A/2) ~ sinh(s) sinh(s-a), sin^2(A/2) ~ sinh(s-b) sinh(s-c)
    const double x = std::sinh(s) * std::sinh(s - opp);
    const double y = std::sinh(s - l1) * std::sinh(s - l2);
    if (!(x > 0.0) || !(y > 0.0))
      throw DegenerateTriangle("corner angle outside (0, pi)");
    tg.angle[k] = 2.0 * std::atan2(std::sqrt(y), std::sqrt(x));
    tg.cot[k] = (x - y) / (2.0 * std::sqrt(x * y));
    angle_sum += tg.angle[k];
  }
  tg.area = std::numbers::pi - angle_sum;
  if (!(tg.area > 0.0) || !std::isfinite(tg.area))
    throw DegenerateTriangle("non-positive hyperbolic area");
  return tg;
}

}  // namespace toda
