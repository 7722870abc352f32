#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace sle0::detail {

// Dense row-major matrix just big enough for the coefficient-space Newton
// systems (order <= ~12) and the locus tracer's 2x2 models.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

// Solve A x = b by partial-pivot LU. Returns false on (near-)singular A.
inline bool lu_solve(Mat A, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = A.rows;
  if (n != A.cols || b.size() != n) return false;
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(A(i, k)) > best) {
        best = std::abs(A(i, k));
        p = i;
      }
    }
    if (best < 1e-300) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = A(i, k) / A(k, k);
      A(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= m * A(k, j);
      b[i] -= m * b[k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
    x[ii] = s / A(ii, ii);
  }
  return true;
}

struct CMat {
  std::size_t n = 0;
  std::vector<std::complex<double>> a;
  explicit CMat(std::size_t n_) : n(n_), a(n_ * n_, 0.0) {}
  std::complex<double>& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
};

inline bool lu_solve_complex(CMat A, std::vector<std::complex<double>> b,
                             std::vector<std::complex<double>>& x) {
  const std::size_t n = A.n;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > best) {
        best = std::abs(A(i, k));
        p = i;
      }
    if (best < 1e-300) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::complex<double> m = A(i, k) / A(k, k);
      A(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= m * A(k, j);
      b[i] -= m * b[k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    std::complex<double> s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
    x[ii] = s / A(ii, ii);
  }
  return true;
}

// Least squares via normal equations; adequate for the well-scaled
// seed systems used here.
inline bool lstsq(const Mat& A, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t m = A.rows, n = A.cols;
  Mat ata(n, n);
  std::vector<double> atb(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += A(k, i) * A(k, j);
      ata(i, j) = s;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += A(k, i) * b[k];
    atb[i] = s;
  }
  // mild Tikhonov floor keeps degenerate seeds usable
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += ata(i, i);
  const double ridge = 1e-14 * (trace / static_cast<double>(n) + 1.0);
  for (std::size_t i = 0; i < n; ++i) ata(i, i) += ridge;
  return lu_solve(ata, atb, x);
}

}  // namespace sle0::detail
