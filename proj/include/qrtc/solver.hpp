#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrtc/tensor.hpp"

namespace qrtc {

struct IterationRecord {
  double change = 0.0;                  // ||X^{k+1} - X^k||_inf
  std::vector<double> factor_residual;  // ||unfold_n(M_n) - L_n D_n R_n||_F per mode
  double fidelity_residual = 0.0;       // ||X_Omega - T_Omega||_F

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct SolverReport {
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  double wall_time = 0.0;  // seconds
};

struct SolveResult {
  DenseTensor completed;
  SolverReport report;
};

/// A nonfinite value appeared during the iteration. Carries the trace up to
/// and including the failing iteration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, SolverReport report)
      : std::runtime_error("solver diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration),
        report_(std::move(report)) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const SolverReport& report() const noexcept { return report_; }

 private:
  std::size_t iteration_;
  SolverReport report_;
};

/// ||X_Omega - T_Omega||_F
double fidelity_residual(const DenseTensor& x, const Observation& obs);

bool record_is_finite(const IterationRecord& r);

/// ceil(0.1 * min(I_n, t_n)), at least 1.
std::vector<std::size_t> default_ranks(const Dims& dims);
std::vector<double> uniform_alphas(std::size_t order);

}  // namespace qrtc
