#ifndef WENTZELL_LINALG_HPP
#define WENTZELL_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wentzell/core.hpp"

namespace wentzell {

/// Linear system whose first m-1 rows are tridiagonal and whose last row
/// couples the final three unknowns:
///
///   sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = r[i],   i < m-1
///   c2 x[m-3] + c1 x[m-2] + c0 x[m-1]            = r[m-1]
///
/// This is the shape produced by the interior heat stencil plus the
/// one-sided boundary-derivative closure at x = 1. Factor once, solve many.
class TridiagBoundarySystem {
 public:
  TridiagBoundarySystem(std::vector<double> sub, std::vector<double> diag,
                        std::vector<double> sup, double c2, double c1,
                        double c0)
      : sub_(std::move(sub)),
        diag_(std::move(diag)),
        sup_(std::move(sup)),
        c2_(c2),
        c1_(c1),
        c0_(c0) {
    m_ = static_cast<int>(diag_.size()) + 1;
    if (m_ < 4 || sub_.size() != diag_.size() || sup_.size() != diag_.size())
      throw ShapeMismatch("TridiagBoundarySystem: bad band sizes");
    factor();
  }

  int size() const { return m_; }

  /// Solves in place; rhs.size() == m.
  void solve(std::vector<double>& rhs) const {
    if (static_cast<int>(rhs.size()) != m_)
      throw ShapeMismatch("TridiagBoundarySystem::solve: rhs size");
    const int n = m_ - 1;  // tridiagonal rows
    for (int i = 1; i < n; ++i) rhs[i] -= mult_[i] * rhs[i - 1];
    const double rN =
        rhs[m_ - 1] - k2_ * rhs[m_ - 3] - k1_ * rhs[m_ - 2];
    rhs[m_ - 1] = rN / pivot_;
    rhs[m_ - 2] = (rhs[m_ - 2] - sup_[m_ - 2] * rhs[m_ - 1]) / p_[m_ - 2];
    for (int i = m_ - 3; i >= 0; --i)
      rhs[i] = (rhs[i] - sup_[i] * rhs[i + 1]) / p_[i];
  }

  std::vector<double> solved(std::vector<double> rhs) const {
    solve(rhs);
    return rhs;
  }

 private:
  void factor() {
    const int n = m_ - 1;
    p_.assign(n, 0.0);
    mult_.assign(n, 0.0);
    p_[0] = diag_[0];
    check_pivot(p_[0]);
    for (int i = 1; i < n; ++i) {
      mult_[i] = sub_[i] / p_[i - 1];
      p_[i] = diag_[i] - mult_[i] * sup_[i - 1];
      check_pivot(p_[i]);
    }
    // Fold the 3-entry boundary row onto the eliminated rows m-3, m-2.
    k2_ = c2_ / p_[m_ - 3];
    const double u1 = c1_ - k2_ * sup_[m_ - 3];
    k1_ = u1 / p_[m_ - 2];
    pivot_ = c0_ - k1_ * sup_[m_ - 2];
    check_pivot(pivot_);
  }

  static void check_pivot(double p) {
    if (!(std::fabs(p) > 1e-300))
      throw SingularSystem("TridiagBoundarySystem: vanishing pivot");
  }

  std::vector<double> sub_, diag_, sup_;
  double c2_, c1_, c0_;
  int m_ = 0;
  std::vector<double> p_, mult_;
  double k2_ = 0, k1_ = 0, pivot_ = 0;
};

// ---------------------------------------------------------------------------
// Small dense SPD systems (Gram matrices of exponential families)
// ---------------------------------------------------------------------------

/// Cholesky factorization A = L L^T of a row-major n x n SPD matrix.
/// Returns false on a non-positive pivot.
inline bool cholesky_factor(std::vector<double>& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  return true;
}

inline void cholesky_solve(const std::vector<double>& l, int n,
                           std::vector<double>& x) {
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
    x[i] = s / l[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l[k * n + i] * x[k];
    x[i] = s / l[i * n + i];
  }
}

/// SPD solve with two passes of iterative refinement; the residual is
/// accumulated in extended precision to squeeze accuracy out of
/// ill-conditioned Gram systems.
inline std::vector<double> solve_spd_refined(const std::vector<double>& a,
                                             int n, std::vector<double> b,
                                             int refine_passes = 2) {
  std::vector<double> l = a;
  if (!cholesky_factor(l, n))
    throw IllConditioned("solve_spd_refined: matrix not positive definite");
  std::vector<double> x = b;
  cholesky_solve(l, n, x);
  std::vector<double> r(n);
  for (int pass = 0; pass < refine_passes; ++pass) {
    for (int i = 0; i < n; ++i) {
      long double s = b[i];
      for (int k = 0; k < n; ++k)
        s -= static_cast<long double>(a[i * n + k]) * x[k];
      r[i] = static_cast<double>(s);
    }
    cholesky_solve(l, n, r);
    for (int i = 0; i < n; ++i) x[i] += r[i];
  }
  return x;
}

/// 1-norm condition estimate by explicit inversion (fine for the small
/// truncations used here).
inline double condition_1norm(const std::vector<double>& a, int n) {
  std::vector<double> l = a;
  if (!cholesky_factor(l, n)) return std::numeric_limits<double>::infinity();
  double norm_a = 0.0, norm_inv = 0.0;
  std::vector<double> col(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::fabs(a[i * n + j]);
    norm_a = std::max(norm_a, s);
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    cholesky_solve(l, n, col);
    s = 0.0;
    for (int i = 0; i < n; ++i) s += std::fabs(col[i]);
    norm_inv = std::max(norm_inv, s);
  }
  return norm_a * norm_inv;
}

}  // namespace wentzell

#endif  // WENTZELL_LINALG_HPP
