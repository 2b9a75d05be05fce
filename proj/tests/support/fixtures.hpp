#pragma once

// Shared generators and reference implementations for the test suites.
// Everything here is written against raw loops so it does not lean on the
// library code under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "qrtc/tensor.hpp"

namespace qrtc::testing {

inline Dims random_dims(std::mt19937_64& rng, std::size_t order, std::size_t max_extent) {
  std::uniform_int_distribution<std::size_t> extent(1, max_extent);
  Dims dims(order);
  for (auto& d : dims) d = extent(rng);
  return dims;
}

inline DenseTensor random_tensor(std::mt19937_64& rng, const Dims& dims) {
  std::normal_distribution<double> normal;
  DenseTensor t(dims);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

// Orthonormal columns by modified Gram-Schmidt (applied twice).
inline Matrix random_orthonormal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix q = random_matrix(rng, rows, cols);
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      q.col(j) /= q.col(j).norm();
    }
  return q;
}

// Column index of element `index` (0-based) in the mode-`mode` unfolding,
// straight from j = sum_{k != n} i_k J_k with J_k = prod_{m < k, m != n} I_m.
inline std::size_t unfolding_column(const Dims& dims, const std::vector<std::size_t>& index, std::size_t mode) {
  std::size_t j = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k + 1 == mode) continue;
    std::size_t stride = 1;
    for (std::size_t m = 0; m < k; ++m)
      if (m + 1 != mode) stride *= dims[m];
    j += index[k] * stride;
  }
  return j;
}

// Enumerates every multi-index with nested-loop (odometer) order,
// first index fastest, calling f(index, flat_position).
template <typename F>
void for_each_index(const Dims& dims, F&& f) {
  std::vector<std::size_t> index(dims.size(), 0);
  const std::size_t total = element_count(dims);
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(index, flat);
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (++index[k] < dims[k]) break;
      index[k] = 0;
    }
  }
}

// Element (i1..iN) of the tensor built from a flat buffer where
// position = i1 + I1 (i2 + I2 (i3 + ...)).
inline double naive_element(const DenseTensor& t, const std::vector<std::size_t>& index) {
  std::size_t flat = 0;
  for (std::size_t k = t.dims().size(); k-- > 0;) flat = flat * t.dims()[k] + index[k];
  return t[flat];
}

inline Matrix naive_unfold(const DenseTensor& t, std::size_t mode) {
  const Dims& dims = t.dims();
  const std::size_t rows = dims[mode - 1];
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
  for_each_index(dims, [&](const std::vector<std::size_t>& index, std::size_t flat) {
    m(static_cast<Eigen::Index>(index[mode - 1]), static_cast<Eigen::Index>(unfolding_column(dims, index, mode))) =
        t[flat];
  });
  return m;
}

// G x_1 U1 x_2 U2 ... by explicit summation over the core.
inline DenseTensor tucker_tensor(const DenseTensor& core, const std::vector<Matrix>& factors) {
  Dims dims;
  for (const auto& u : factors) dims.push_back(static_cast<std::size_t>(u.rows()));
  DenseTensor t(dims);
  for_each_index(dims, [&](const std::vector<std::size_t>& outer, std::size_t flat) {
    double sum = 0.0;
    for_each_index(core.dims(), [&](const std::vector<std::size_t>& inner, std::size_t core_flat) {
      double w = core[core_flat];
      for (std::size_t n = 0; n < factors.size(); ++n)
        w *= factors[n](static_cast<Eigen::Index>(outer[n]), static_cast<Eigen::Index>(inner[n]));
      sum += w;
    });
    t[flat] = sum;
  });
  return t;
}

// Multilinear rank-(r,...,r) tensor with standard normal core and factors,
// scaled so that max |entry| = 1.
inline DenseTensor random_tucker(std::mt19937_64& rng, const Dims& dims, std::size_t rank) {
  const DenseTensor core = random_tensor(rng, Dims(dims.size(), rank));
  std::vector<Matrix> factors;
  for (std::size_t d : dims)
    factors.push_back(random_matrix(rng, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank)));
  DenseTensor t = tucker_tensor(core, factors);
  double peak = 0.0;
  for (double v : t.data()) peak = std::max(peak, std::abs(v));
  for (double& v : t.data()) v /= peak;
  return t;
}

// Sum of `components` blocky images (each a stack of random rectangles)
// modulated by smooth spectral profiles along mode 3; scaled into [0, 1].
inline DenseTensor piecewise_constant_cube(std::mt19937_64& rng, std::size_t extent, std::size_t components = 3,
                                           std::size_t rectangles = 4) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(extent);
  DenseTensor t({extent, extent, extent});
  for (std::size_t c = 0; c < components; ++c) {
    Matrix image = Matrix::Zero(n, n);
    for (std::size_t q = 0; q < rectangles; ++q) {
      auto r0 = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(extent));
      auto r1 = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(extent));
      auto c0 = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(extent));
      auto c1 = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(extent));
      if (r0 > r1) std::swap(r0, r1);
      if (c0 > c1) std::swap(c0, c1);
      image.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).array() += unit(rng);
    }
    const double phase = unit(rng) * 6.0;
    const double frequency = 0.5 + unit(rng) * 2.0;
    for (std::size_t k = 0; k < extent; ++k) {
      const double w = 1.0 + 0.5 * std::sin(phase + frequency * 3.0 * static_cast<double>(k) / static_cast<double>(extent));
      for (std::size_t j = 0; j < extent; ++j)
        for (std::size_t i = 0; i < extent; ++i)
          t[i + extent * (j + extent * k)] += image(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * w;
    }
  }
  double peak = 0.0;
  for (double v : t.data()) peak = std::max(peak, v);
  for (double& v : t.data()) v /= peak;
  return t;
}

// Uniformly random subset of floor(sr * size) entries, independent of the
// library's sampler.
inline Mask shuffled_mask(std::mt19937_64& rng, const Dims& dims, double sr) {
  const std::size_t total = element_count(dims);
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  Mask mask(dims);
  for (std::size_t i = 0; i < static_cast<std::size_t>(sr * static_cast<double>(total)); ++i) mask.set(idx[i], true);
  return mask;
}

inline double relative_error(const DenseTensor& estimate, const DenseTensor& truth) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  return std::sqrt(num / den);
}

// Whole-tensor PSNR with peak 1, computed directly.
inline double naive_psnr(const DenseTensor& truth, const DenseTensor& estimate) {
  double mse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) mse += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
  mse /= static_cast<double>(truth.size());
  return 10.0 * std::log10(1.0 / mse);
}

// Minimises tau * sum_j sqrt(||l_j||^2 + delta^2) + 0.5 * ||L - C||_F^2 with
// damped Newton steps, column by column. A numerical stand-in for the
// group-lasso proximal map that never uses its closed form.
inline Matrix numeric_group_prox(const Matrix& c, double tau, double delta = 1e-12) {
  Matrix out = c;
  const Eigen::Index m = c.rows();
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const Eigen::VectorXd target = c.col(j);
    auto objective = [&](const Eigen::VectorXd& l) {
      return tau * std::sqrt(l.squaredNorm() + delta * delta) + 0.5 * (l - target).squaredNorm();
    };
    Eigen::VectorXd l = target;
    for (int it = 0; it < 500; ++it) {
      const double s = std::sqrt(l.squaredNorm() + delta * delta);
      const Eigen::VectorXd grad = tau * l / s + (l - target);
      if (grad.norm() < 1e-15) break;
      const Matrix hess = tau * (Matrix::Identity(m, m) / s - l * l.transpose() / (s * s * s)) + Matrix::Identity(m, m);
      const Eigen::VectorXd step = hess.ldlt().solve(grad);
      double t = 1.0;
      const double f0 = objective(l);
      while (t > 1e-20 && objective(l - t * step) > f0 - 1e-4 * t * grad.dot(step)) t *= 0.5;
      if (t <= 1e-20) break;
      l -= t * step;
    }
    out.col(j) = l;
  }
  return out;
}

// Singular value shrink built from the symmetric eigendecomposition
// Y^T Y = V diag(s^2) V^T: Y V diag(max(1 - mu / s, 0)) V^T. Shares no code
// path with the SVD routines.
inline Matrix eigen_singular_shrink(const Matrix& y, double mu) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(y.transpose() * y);
  const Eigen::VectorXd s = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd gain(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) gain(i) = s(i) > mu ? 1.0 - mu / s(i) : 0.0;
  const Matrix& v = eig.eigenvectors();
  return y * v * gain.asDiagonal() * v.transpose();
}

inline double jacobi_nuclear_norm(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues().sum();
}

}  // namespace qrtc::testing
