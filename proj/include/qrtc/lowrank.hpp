#pragma once

#include <cstddef>

#include "qrtc/tensor.hpp"

namespace qrtc {

/// Thin QR factor pair: `q` has orthonormal columns, `t` is upper trapezoidal
/// with a nonnegative diagonal.
struct ThinQr {
  Matrix q;  // m x r
  Matrix t;  // r x k
};

/// Householder QR of an m x k matrix, keeping the first `keep` columns of Q
/// and the matching rows of T. Columns of Q are sign-flipped so that
/// diag(T) >= 0. Rank-deficient input still yields orthonormal Q columns.
ThinQr qr_thin(const Matrix& a, std::size_t keep);

/// X ~ L * D * R with L^T L = I, R R^T = I and a square (not necessarily
/// diagonal) core D.
struct LdrFactors {
  Matrix left;   // m x r
  Matrix core;   // r x r
  Matrix right;  // r x n

  /// L = eye(m, r), D = eye(r, r), R = eye(r, n).
  static LdrFactors identity(std::size_t rows, std::size_t cols, std::size_t rank);

  std::size_t rank() const noexcept { return static_cast<std::size_t>(core.rows()); }
  Matrix product() const { return left * core * right; }
};

/// One alternating pass: L <- Q(X R^T), R <- Q(X^T L)^T, D <- L^T X R^T.
/// The D update is read off the second QR's triangular factor.
void csvd_qr_sweep(const Matrix& x, LdrFactors& factors);

/// Solver kernel shared by the ADMM methods: one csvd_qr_sweep on `target`
/// followed by D <- lnms_prox(D, tau). Returns the refreshed L * D * R.
Matrix shrink_sweep(const Matrix& target, LdrFactors& factors, double tau);

struct CsvdResult {
  LdrFactors factors;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kCsvdDefaultMaxIters = 100;

/// Iterates csvd_qr_sweep from the identity start until
/// ||X - L D R||_F^2 <= tol or `max_iters` sweeps have run.
/// A negative `tol` selects the default 1e-10 * ||X||_F^2.
CsvdResult csvd_qr(const Matrix& x, std::size_t rank, double tol = -1.0,
                   std::size_t max_iters = kCsvdDefaultMaxIters);

/// Sum of column Euclidean norms.
double l21_norm(const Matrix& a);

/// Sum of singular values from a full SVD. Test oracle and baseline only.
double nuclear_norm(const Matrix& a);

/// argmin_L tau*||L||_{2,1} + 0.5*||L - C||_F^2, i.e. per-column shrinkage.
Matrix lnms_prox(const Matrix& c, double tau);

/// argmin_X mu*||X||_* + 0.5*||X - Y||_F^2 via a full SVD.
Matrix svt_prox(const Matrix& y, double mu);

/// ||L^T L - I||_F and ||R R^T - I||_F.
double left_orthogonality_error(const LdrFactors& f);
double right_orthogonality_error(const LdrFactors& f);

}  // namespace qrtc
