#pragma once

#include <Eigen/Dense>

namespace relest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& x) { return 0.5 * (x + x.transpose()); }

/// Largest relative asymmetry |X - X^T| / max(1, |X|), Frobenius.
double relative_asymmetry(const Matrix& x);

/// max |eigenvalue| of a square matrix. Throws on non-square input.
double spectral_radius(const Matrix& a);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue_sym(const Matrix& x);

/// Count of eigenvalues above 1e-9 * max(sigma_max, 1). Input assumed PSD.
int numerical_rank(const Matrix& sigma);

/// Symmetric square root with negative eigenvalues clamped to zero.
Matrix psd_sqrt(const Matrix& x);

/// z^T Pi^+ z with singular directions (below 1e-10 * sigma_max) truncated.
/// Sets *in_range = false when z has a component outside range(Pi).
double quadform_pinv(const Vector& z, const Matrix& pi, bool* in_range);

/// true if symmetric X has all eigenvalues >= -tol * max(1, |lambda|_max)
bool is_psd(const Matrix& x, double tol = 1e-10);

/// Golden-section minimization of a unimodal function on [lo, hi].
/// Returns the argmin; tolerance is on the argument.
template <typename F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
  static const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double mid = 0.5 * (a + b);
  // endpoints can win when the minimum sits on the boundary
  double best = mid, fb = f(mid);
  for (double cand : {lo, hi}) {
    double fc = f(cand);
    if (fc < fb) {
      fb = fc;
      best = cand;
    }
  }
  return best;
}

}  // namespace relest
