#pragma once

#include <cstddef>
#include <vector>

#include "qrtc/solver.hpp"
#include "qrtc/tensor.hpp"

namespace qrtc {

// Reference completion with a full SVD per mode and iteration
// (weighted nuclear-norm ADMM). Used as a speed and accuracy baseline.

struct SvtBaselineConfig {
  std::vector<double> alphas;
  double mu0 = 1e-4;
  double rho = 1.05;
  double eps = 1e-5;
  std::size_t max_iters = 500;

  static SvtBaselineConfig defaults(const Dims& dims);
  void validate(const Dims& dims) const;
};

/// Each iteration: M_n = fold(svt(unfold(X + Y_n/mu), alpha_n/mu)),
/// X off Omega = mean_n(M_n - Y_n/mu), X on Omega = T,
/// Y_n += mu (X - M_n), mu <- rho mu.
SolveResult solve_svt_baseline(const Observation& obs, const SvtBaselineConfig& config);

}  // namespace qrtc
