#pragma once

#include <cstddef>
#include <vector>

#include "qrtc/lowrank.hpp"
#include "qrtc/solver.hpp"
#include "qrtc/tensor.hpp"

namespace qrtc {

// Tensor completion by L2,1-norm minimisation of QR-factorised unfoldings,
// solved with ADMM. Each outer iteration performs one CSVD-QR sweep per mode.

struct TlnmConfig {
  std::vector<double> alphas;       // per-mode weights, sum to 1
  std::vector<std::size_t> ranks;   // per-mode factor ranks
  double mu0 = 1e-4;
  double rho = 1.05;
  double eps = 1e-5;
  std::size_t max_iters = 500;

  /// alpha_n = 1/N, r_n = ceil(0.1 * min(I_n, t_n)).
  static TlnmConfig defaults(const Dims& dims);
  void validate(const Dims& dims) const;
};

struct TlnmState {
  DenseTensor estimate;                    // X
  std::vector<DenseTensor> mode_tensors;   // M_n
  std::vector<LdrFactors> factors;         // (L_n, D_n, R_n)
  std::vector<Matrix> low_rank;            // cached L_n D_n R_n
  DenseTensor fidelity_multiplier;         // P
  std::vector<DenseTensor> consensus_multipliers;  // Q_n, tensor form
  std::vector<Matrix> factor_multipliers;  // Phi_n, unfolded form
  double mu = 0.0;

  /// X = T_Omega, M_n = X, identity factors, zero multipliers, mu = mu0.
  static TlnmState initial(const Observation& obs, const TlnmConfig& config);
};

// Single ADMM block updates. `mode` is 1-based.

/// G_n = unfold(M_n) + Phi_n / mu; one CSVD-QR sweep on G_n refreshes L_n and
/// R_n, then D_n = lnms_prox(L_n^T G_n R_n^T, alpha_n / mu).
void update_factors(TlnmState& state, const TlnmConfig& config, std::size_t mode);

void update_mode_tensor(TlnmState& state, std::size_t mode);

void update_global(TlnmState& state, const Observation& obs);

/// Dual ascent on Q_n, Phi_n and P, then mu <- rho * mu.
void update_multipliers(TlnmState& state, const Observation& obs, const TlnmConfig& config);

/// sum_n alpha_n * ||D_n||_{2,1}
double l21_objective(const TlnmState& state, const TlnmConfig& config);

/// Runs ADMM iterations until ||X^{k+1} - X^k||_inf <= eps or
/// max_iters. Throws DivergenceError on nonfinite iterates.
SolveResult solve_tlnm(const Observation& obs, const TlnmConfig& config);

}  // namespace qrtc
