#include "qrtc/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "qrtc/errors.hpp"

namespace qrtc {

namespace {

struct Reflector {
  Eigen::VectorXd v;  // v(0) == 1
  double beta = 0.0;
};

// H = I - beta v v^T with H x = ||x|| e_1 (Golub & Van Loan, Alg. 5.1.1).
Reflector make_reflector(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Reflector h;
  h.v = x;
  h.v(0) = 1.0;
  const double sigma = x.size() > 1 ? x.tail(x.size() - 1).squaredNorm() : 0.0;
  if (sigma == 0.0) return h;  // already reduced; diagonal sign is fixed afterwards
  const double x0 = x(0);
  const double mu = std::sqrt(x0 * x0 + sigma);
  const double v0 = x0 <= 0.0 ? x0 - mu : -sigma / (x0 + mu);
  h.beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
  h.v.tail(x.size() - 1) /= v0;
  return h;
}

void apply_reflector(const Reflector& h, Eigen::Block<Matrix> block) {
  if (h.beta == 0.0) return;
  const Eigen::RowVectorXd w = h.beta * (h.v.transpose() * block);
  block.noalias() -= h.v * w;
}

}  // namespace

ThinQr qr_thin(const Matrix& a, std::size_t keep) {
  const auto m = a.rows();
  const auto k = a.cols();
  const auto r = static_cast<Eigen::Index>(keep);
  if (r < 1 || r > std::min(m, k))
    throw ArgumentError("qr_thin: keep=" + std::to_string(keep) + " outside 1..min(rows, cols)");
  if (!a.allFinite()) throw ArgumentError("qr_thin: input is not finite");

  // Rows >= r of T and reflectors >= r never touch the kept columns of Q.
  Matrix work = a;
  std::vector<Reflector> reflectors;
  reflectors.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index j = 0; j < r; ++j) {
    Reflector h = make_reflector(work.col(j).tail(m - j));
    apply_reflector(h, work.block(j, j, m - j, k - j));
    reflectors.push_back(std::move(h));
  }

  ThinQr out;
  out.t = work.topRows(r).triangularView<Eigen::Upper>();
  out.q = Matrix::Identity(m, r);
  for (Eigen::Index j = r - 1; j >= 0; --j) apply_reflector(reflectors[j], out.q.block(j, 0, m - j, r));

  for (Eigen::Index j = 0; j < r; ++j)
    if (out.t(j, j) < 0.0) {
      out.t.row(j) *= -1.0;
      out.q.col(j) *= -1.0;
    }
  return out;
}

LdrFactors LdrFactors::identity(std::size_t rows, std::size_t cols, std::size_t rank) {
  const auto m = static_cast<Eigen::Index>(rows);
  const auto n = static_cast<Eigen::Index>(cols);
  const auto r = static_cast<Eigen::Index>(rank);
  return LdrFactors{Matrix::Identity(m, r), Matrix::Identity(r, r), Matrix::Identity(r, n)};
}

void csvd_qr_sweep(const Matrix& x, LdrFactors& factors) {
  const std::size_t r = factors.rank();
  factors.left = qr_thin(x * factors.right.transpose(), r).q;
  ThinQr rq = qr_thin(x.transpose() * factors.left, r);
  factors.right = rq.q.transpose();
  // T = Q^T X^T L, so T^T = L^T X R^T is exactly the least-squares core.
  factors.core = rq.t.transpose();
}

Matrix shrink_sweep(const Matrix& target, LdrFactors& factors, double tau) {
  csvd_qr_sweep(target, factors);
  factors.core = lnms_prox(factors.core, tau);
  return factors.product();
}

CsvdResult csvd_qr(const Matrix& x, std::size_t rank, double tol, std::size_t max_iters) {
  const auto m = static_cast<std::size_t>(x.rows());
  const auto n = static_cast<std::size_t>(x.cols());
  if (rank < 1 || rank > std::min(m, n)) throw ArgumentError("csvd_qr: rank outside 1..min(rows, cols)");
  if (!x.allFinite()) throw ArgumentError("csvd_qr: input is not finite");
  if (tol < 0.0) tol = 1e-10 * x.squaredNorm();

  CsvdResult result{LdrFactors::identity(m, n, rank), 0};
  while (true) {
    if ((x - result.factors.product()).squaredNorm() <= tol) break;
    if (result.iterations >= max_iters) break;
    csvd_qr_sweep(x, result.factors);
    ++result.iterations;
  }
  return result;
}

double l21_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) sum += a.col(j).norm();
  return sum;
}

double nuclear_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(a).singularValues().sum();
}

Matrix lnms_prox(const Matrix& c, double tau) {
  if (tau < 0.0) throw ArgumentError("lnms_prox: tau must be nonnegative");
  Matrix out = c;
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const double norm = c.col(j).norm();
    const double scale = norm > 0.0 ? std::max(norm - tau, 0.0) / norm : 0.0;
    out.col(j) *= scale;
  }
  return out;
}

Matrix svt_prox(const Matrix& y, double mu) {
  if (mu < 0.0) throw ArgumentError("svt_prox: mu must be nonnegative");
  if (y.size() == 0) return y;
  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  Eigen::Index kept = 0;
  while (kept < sigma.size() && sigma(kept) > mu) ++kept;
  const Eigen::VectorXd shrunk = (sigma.head(kept).array() - mu).matrix();
  return svd.matrixU().leftCols(kept) * shrunk.asDiagonal() * svd.matrixV().leftCols(kept).transpose();
}

double left_orthogonality_error(const LdrFactors& f) {
  const auto r = f.left.cols();
  return (f.left.transpose() * f.left - Matrix::Identity(r, r)).norm();
}

double right_orthogonality_error(const LdrFactors& f) {
  const auto r = f.right.rows();
  return (f.right * f.right.transpose() - Matrix::Identity(r, r)).norm();
}

}  // namespace qrtc
