#pragma once

#include <stdexcept>
#include <string>

namespace toda {

/// Base of every error raised by the library. The CLI maps `DomainError`
/// to exit code 1 and everything else to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical hypothesis of the problem is violated by the input.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Gauss data f leaves the set 0 <= f <= eta/(1+eta)^2.
class AdmissibilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An outer fixed-point iterate left the admissible set of the Gauss map.
class AdmissibilityLost : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Integral obstruction: Delta v = c - (nonnegative) has no solution.
class InfeasibleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// alpha vanishes identically while the normal degree is positive.
class InfeasibleDegree : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

/// Normal degree outside 0 <= d <= 2g-2.
class DegreeBoundError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Permutation images do not satisfy [a1,b1][a2,b2] = 1.
class RelatorError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Permutation action is not transitive.
class DisconnectedCover : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Ascent of J grew without bound.
class UnboundedDetected : public DomainError {
 public:
  using DomainError::DomainError;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class DegenerateTriangle : public Error {
 public:
  using Error::Error;
};

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

class LinearSolveError : public Error {
 public:
  using Error::Error;
};

/// Fields, densities, or covers that do not match the mesh they are used with.
class MeshMismatch : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace toda
