#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "qrtc/lowrank.hpp"
#include "qrtc/solver.hpp"
#include "qrtc/tensor.hpp"

namespace qrtc {

// L2,1-norm tensor completion with an anisotropic total-variation penalty
// lambda * sum_n beta_n |F_n X_(n)| on selected modes, solved with ADMM.
//
// Penalties, in the order they appear in the augmented Lagrangian:
//   mus[0]  Z_n = X          (consensus)
//   mus[1]  Q_n = F_n A_n    (TV slack)
//   mus[2]  A_n = X_(n)      (unfolding copy)
//   mus[3]  X_Omega = T_Omega
//   mus[4]  Z_n(n) = L_n D_n R_n

struct TlnmTvConfig {
  std::vector<double> alphas;
  std::vector<std::size_t> ranks;
  double rho = 1.05;
  double eps = 1e-5;
  std::size_t max_iters = 500;
  double lambda = 1.0;
  std::vector<int> betas;  // 0 or 1 per mode
  std::array<double, 5> mus{1e-4, 1e-4, 1e-4, 1e-4, 1e-4};

  /// Same weights and ranks as TlnmConfig::defaults; TV on modes 1 and 2
  /// (the spatial modes of an image stack) when they have extent >= 2.
  static TlnmTvConfig defaults(const Dims& dims);
  void validate(const Dims& dims) const;
};

struct TlnmTvState {
  DenseTensor estimate;                     // X
  std::vector<DenseTensor> consensus;       // Z_n
  std::vector<Matrix> unfolding_copies;     // A_n, I_n x t_n
  std::vector<Matrix> tv_slack;             // Q_n, (I_n - 1) x t_n
  std::vector<LdrFactors> factors;
  std::vector<Matrix> low_rank;             // cached L_n D_n R_n
  std::vector<DenseTensor> consensus_multipliers;  // G_n
  std::vector<Matrix> slack_multipliers;    // Lambda_n
  std::vector<Matrix> copy_multipliers;     // Gamma_n
  std::vector<Matrix> factor_multipliers;   // Phi_n
  DenseTensor fidelity_multiplier;          // P
  std::array<double, 5> mus{};

  /// X = T_Omega, Z_n = X, A_n = X_(n), Q_n = 0, identity factors, zero
  /// multipliers.
  static TlnmTvState initial(const Observation& obs, const TlnmTvConfig& config);
};

/// (I-1) x I first-difference matrix: F(i,i) = 1, F(i,i+1) = -1.
Matrix difference_matrix(std::size_t size);

/// Entrywise soft threshold sign(x) * max(|x| - alpha, 0).
Matrix shrinkage(const Matrix& x, double alpha);

/// F * a and F^T * y without forming F.
Matrix apply_difference(const Matrix& a);
Matrix apply_difference_transpose(const Matrix& y);

/// Solves (mu2 * F^T F + mu3 * I) A = rhs column by column. The system is
/// tridiagonal SPD for mu3 > 0 and is factorised directly.
Matrix solve_shifted_difference_system(double mu2, double mu3, const Matrix& rhs);

// Block updates; `mode` is 1-based.
void update_tv_slack(TlnmTvState& state, const TlnmTvConfig& config, std::size_t mode);
void update_factors_tv(TlnmTvState& state, const TlnmTvConfig& config, std::size_t mode);
void update_consensus(TlnmTvState& state, std::size_t mode);
void update_unfolding_copy(TlnmTvState& state, const TlnmTvConfig& config, std::size_t mode);
void update_global_tv(TlnmTvState& state, const TlnmTvConfig& config, const Observation& obs);
/// Dual ascent on every constraint, then every penalty is multiplied by rho.
/// Lambda_n and Gamma_n stay frozen on modes with beta_n = 0.
void update_multipliers_tv(TlnmTvState& state, const TlnmTvConfig& config, const Observation& obs);

/// lambda * sum_n beta_n * sum_ij |Q_n(i,j)|
double tv_objective(const TlnmTvState& state, const TlnmTvConfig& config);
double l21_objective(const TlnmTvState& state, const TlnmTvConfig& config);

SolveResult solve_tlnmtv(const Observation& obs, const TlnmTvConfig& config);

}  // namespace qrtc
