#include "relest/model.hpp"

#include <sstream>
#include <stdexcept>

#include "relest/filtering.hpp"

namespace relest {

namespace {

Matrix ingest_symmetric(const Matrix& x, const char* name) {
  if (x.rows() != x.cols()) {
    std::ostringstream os;
    os << name << " must be square, got " << x.rows() << "x" << x.cols();
    throw std::invalid_argument(os.str());
  }
  if (relative_asymmetry(x) > 1e-8) {
    std::ostringstream os;
    os << name << " is not symmetric (relative asymmetry "
       << relative_asymmetry(x) << " > 1e-8)";
    throw std::invalid_argument(os.str());
  }
  return symmetrize(x);
}

}  // namespace

LtiSystem LtiSystem::create(Matrix A, Matrix C, Matrix Q, Matrix R, Matrix Pi0) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("A must be square");
  }
  const int dim_x = static_cast<int>(A.rows());
  if (dim_x == 0) throw std::invalid_argument("A must be nonempty");
  if (C.cols() != dim_x) {
    throw std::invalid_argument("C must have dim_x columns");
  }
  const int dim_y = static_cast<int>(C.rows());
  if (dim_y == 0) throw std::invalid_argument("C must have at least one row");

  LtiSystem sys;
  sys.A = std::move(A);
  sys.C = std::move(C);
  sys.Q = ingest_symmetric(Q, "Q");
  sys.R = ingest_symmetric(R, "R");
  if (sys.Q.rows() != dim_x) throw std::invalid_argument("Q must be dim_x x dim_x");
  if (sys.R.rows() != dim_y) throw std::invalid_argument("R must be dim_y x dim_y");
  sys.Pi0 = Pi0.size() == 0 ? sys.Q : ingest_symmetric(Pi0, "Pi0");
  if (sys.Pi0.rows() != dim_x) {
    throw std::invalid_argument("Pi0 must be dim_x x dim_x");
  }
  sys.dim_x = dim_x;
  sys.dim_y = dim_y;
  return sys;
}

SystemSet SystemSet::create(std::vector<LtiSystem> systems) {
  if (systems.empty()) {
    throw std::invalid_argument("SystemSet needs at least one system");
  }
  return SystemSet{std::move(systems)};
}

bool ValidationReport::valid() const {
  for (const auto& issue : issues) {
    if (issue.severity == ValidationIssue::Severity::Error) return false;
  }
  return true;
}

std::vector<std::string> ValidationReport::errors() const {
  std::vector<std::string> out;
  for (const auto& issue : issues) {
    if (issue.severity == ValidationIssue::Severity::Error) {
      out.push_back(issue.message);
    }
  }
  return out;
}

std::vector<std::string> ValidationReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& issue : issues) {
    if (issue.severity == ValidationIssue::Severity::Warning) {
      out.push_back(issue.message);
    }
  }
  return out;
}

ValidationReport validate_system(const LtiSystem& sys) {
  ValidationReport report;
  auto error = [&](std::string msg) {
    report.issues.push_back({ValidationIssue::Severity::Error, std::move(msg)});
  };
  auto warning = [&](std::string msg) {
    report.issues.push_back({ValidationIssue::Severity::Warning, std::move(msg)});
  };

  if (sys.A.rows() != sys.A.cols() || sys.A.rows() != sys.dim_x) {
    error("A is not square of size dim_x");
  }
  if (sys.C.rows() != sys.dim_y || sys.C.cols() != sys.dim_x) {
    error("C dimensions do not match (dim_y x dim_x)");
  }
  if (sys.Q.rows() != sys.dim_x || sys.Q.cols() != sys.dim_x) {
    error("Q dimensions do not match A");
  }
  if (sys.R.rows() != sys.dim_y || sys.R.cols() != sys.dim_y) {
    error("R dimensions do not match C");
  }
  if (!report.issues.empty()) return report;

  if (min_eigenvalue_sym(sys.Q) <= 1e-10) error("Q not PD");
  if (min_eigenvalue_sym(sys.R) <= 1e-10) error("R not PD");
  if (min_eigenvalue_sym(sys.Pi0) < -1e-10) error("Pi0 not PSD");

  double rho = spectral_radius(sys.A);
  if (rho <= 1.0) {
    warning("spectral radius of A is " + std::to_string(rho) +
            " <= 1 (stable system; the scheduling problem is degenerate)");
  }

  if (report.valid()) {
    try {
      solve_dare(sys);
    } catch (const DetectabilityError& e) {
      error(std::string("detectability failure: ") + e.what());
    }
  }
  return report;
}

}  // namespace relest
