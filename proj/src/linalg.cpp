#include "relest/linalg.hpp"

#include <stdexcept>

namespace relest {

double relative_asymmetry(const Matrix& x) {
  double scale = std::max(1.0, x.norm());
  return (x - x.transpose()).norm() / scale;
}

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("spectral_radius: matrix must be square");
  }
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue_sym(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(x));
  return es.eigenvalues().minCoeff();
}

int numerical_rank(const Matrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sigma));
  const auto& ev = es.eigenvalues();
  double tol = 1e-9 * std::max(ev.cwiseAbs().maxCoeff(), 1.0);
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) ++r;
  }
  return r;
}

Matrix psd_sqrt(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(x));
  Vector ev = es.eigenvalues().cwiseMax(0.0);
  // rounding noise in nominally-null directions must not leak into samples:
  // a singular covariance generates exactly on its range
  double cut = 1e-12 * ev.maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < cut) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double quadform_pinv(const Vector& z, const Matrix& pi, bool* in_range) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(pi));
  const Vector& ev = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  double sigma_max = ev.cwiseAbs().maxCoeff();
  double cut = 1e-10 * sigma_max;

  Vector zt = v.transpose() * z;
  double quad = 0.0;
  double out_of_range_sq = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut) {
      quad += zt[i] * zt[i] / ev[i];
    } else {
      out_of_range_sq += zt[i] * zt[i];
    }
  }
  if (in_range != nullptr) {
    double znorm = z.norm();
    *in_range = std::sqrt(out_of_range_sq) <= 1e-8 * std::max(1.0, znorm);
  }
  return quad;
}

bool is_psd(const Matrix& x, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(x));
  const auto& ev = es.eigenvalues();
  double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
  return ev.minCoeff() >= -tol * scale;
}

}  // namespace relest
