#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "noc3d/core.hpp"

namespace noc3d {

// Symmetric sparse matrix in CSR form; built from coordinate triplets.
class CsrMatrix {
public:
  CsrMatrix() = default;

  // `entries` maps (row, col) -> value; both triangles must be present.
  CsrMatrix(int n, const std::map<std::pair<int, int>, double>& entries) : n_(n) {
    ptr_.assign(n + 1, 0);
    for (const auto& [rc, v] : entries) ptr_[rc.first + 1]++;
    for (int i = 0; i < n; ++i) ptr_[i + 1] += ptr_[i];
    idx_.resize(entries.size());
    val_.resize(entries.size());
    std::vector<int> cursor(ptr_.begin(), ptr_.end() - 1);
    for (const auto& [rc, v] : entries) {
      const int at = cursor[rc.first]++;
      idx_[at] = rc.second;
      val_[at] = v;
    }
  }

  int rows() const { return n_; }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) s += val_[k] * x[idx_[k]];
      y[i] = s;
    }
  }

  double diagonal(int i) const {
    for (int k = ptr_[i]; k < ptr_[i + 1]; ++k)
      if (idx_[k] == i) return val_[k];
    return 0.0;
  }

  // Copy with `shift[i]` added to each diagonal entry.
  CsrMatrix with_diagonal_shift(const std::vector<double>& shift) const {
    CsrMatrix m = *this;
    for (int i = 0; i < n_; ++i)
      for (int k = m.ptr_[i]; k < m.ptr_[i + 1]; ++k)
        if (m.idx_[k] == i) m.val_[k] += shift[i];
    return m;
  }

  std::vector<std::vector<double>> to_dense() const {
    std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
    for (int i = 0; i < n_; ++i)
      for (int k = ptr_[i]; k < ptr_[i + 1]; ++k) d[i][idx_[k]] = val_[k];
    return d;
  }

private:
  int n_ = 0;
  std::vector<int> ptr_;
  std::vector<int> idx_;
  std::vector<double> val_;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  bool direct = false;
};

// Jacobi-preconditioned conjugate gradients. Fixed accumulation order, so the
// result is bitwise reproducible for identical inputs.
inline std::vector<double> cg_solve(const CsrMatrix& a, const std::vector<double>& b, double tol,
                                    int max_iterations, SolveReport* report = nullptr) {
  const int n = a.rows();
  std::vector<double> x(n, 0.0), r = b, z(n), p(n), ap(n);
  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = a.diagonal(i);
    if (d <= 0) throw solver_error("cg_solve: nonpositive diagonal, matrix is not SPD");
    inv_diag[i] = 1.0 / d;
  }

  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    if (report) *report = {0, 0.0, true, false};
    return x;
  }

  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[i] * z[i];

  int it = 0;
  double rel = 1.0;
  for (; it < max_iterations; ++it) {
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rel = std::sqrt(rnorm) / bnorm;
    if (rel <= tol) break;

    a.multiply(p, ap);
    double pap = 0.0;
    for (int i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (pap <= 0) throw solver_error("cg_solve: p'Ap <= 0, matrix is not SPD");
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  if (report) *report = {it, rel, rel <= tol, false};
  if (rel > tol)
    throw solver_error("cg_solve: no convergence after " + std::to_string(it) +
                       " iterations, relative residual " + std::to_string(rel));
  return x;
}

// Dense Cholesky (LL') solve for small systems.
inline std::vector<double> cholesky_solve(std::vector<std::vector<double>> a,
                                          std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int j = 0; j < n; ++j) {
    double d = a[j][j];
    for (int k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (d <= 0) throw solver_error("cholesky_solve: matrix is not positive definite");
    a[j][j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  for (int i = 0; i < n; ++i) {  // forward
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i][k] * b[k];
    b[i] = s / a[i][i];
  }
  for (int i = n - 1; i >= 0; --i) {  // backward
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a[k][i] * b[k];
    b[i] = s / a[i][i];
  }
  return b;
}

}  // namespace noc3d
