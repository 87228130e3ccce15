#pragma once

#include <string>
#include <vector>

#include "relest/linalg.hpp"

namespace relest {

/// One process/sensor pair: x(k+1) = A x(k) + w, y(k) = C x(k) + v,
/// w ~ N(0,Q), v ~ N(0,R), x(0) ~ N(0,Pi0).
struct LtiSystem {
  Matrix A;
  Matrix C;
  Matrix Q;
  Matrix R;
  Matrix Pi0;
  int dim_x = 0;
  int dim_y = 0;

  /// Checks dimensions, symmetrizes Q/R/Pi0 (rejecting relative asymmetry
  /// above 1e-8). Pi0 may be empty; it then defaults to Q.
  static LtiSystem create(Matrix A, Matrix C, Matrix Q, Matrix R,
                          Matrix Pi0 = Matrix());
};

struct SystemSet {
  std::vector<LtiSystem> systems;

  int n() const { return static_cast<int>(systems.size()); }
  static SystemSet create(std::vector<LtiSystem> systems);
};

struct ValidationIssue {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool valid() const;
  std::vector<std::string> errors() const;
  std::vector<std::string> warnings() const;
};

/// Q/R symmetric PD (eigenvalue tolerance 1e-10), dimension coherence,
/// detectability via DARE fixed-point convergence, and a warning (not an
/// error) when spectral_radius(A) <= 1.
ValidationReport validate_system(const LtiSystem& sys);

}  // namespace relest
