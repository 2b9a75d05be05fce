#include "qrtc/svt_baseline.hpp"

#include <chrono>
#include <cmath>

#include "qrtc/errors.hpp"
#include "qrtc/lowrank.hpp"

namespace qrtc {

SvtBaselineConfig SvtBaselineConfig::defaults(const Dims& dims) {
  SvtBaselineConfig c;
  c.alphas = uniform_alphas(dims.size());
  return c;
}

void SvtBaselineConfig::validate(const Dims& dims) const {
  if (alphas.size() != dims.size()) throw ArgumentError("alphas must have one entry per mode");
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ArgumentError("alphas must be nonnegative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("alphas must sum to 1");
  if (!(mu0 > 0.0)) throw ArgumentError("mu0 must be positive");
  if (!(rho >= 1.0)) throw ArgumentError("rho must be at least 1");
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  if (max_iters < 1) throw ArgumentError("max_iters must be at least 1");
}

SolveResult solve_svt_baseline(const Observation& obs, const SvtBaselineConfig& config) {
  const Dims& dims = obs.values.dims();
  config.validate(dims);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const std::size_t order = dims.size();

  DenseTensor x = obs.values;
  std::vector<DenseTensor> modes(order, x);
  std::vector<DenseTensor> multipliers(order, DenseTensor(dims));
  double mu = config.mu0;
  SolverReport report;

  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    const DenseTensor previous = x;
    bool any_nonzero = false;
    std::vector<double> residuals;
    for (std::size_t n = 0; n < order; ++n) {
      const Matrix target = unfold(x + (1.0 / mu) * multipliers[n], n + 1);
      const Matrix shrunk = svt_prox(target, config.alphas[n] / mu);
      any_nonzero = any_nonzero || shrunk.squaredNorm() > 0.0;
      modes[n] = fold(shrunk, n + 1, dims);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (obs.mask.observed(i)) {
        x[i] = obs.values[i];
        continue;
      }
      double sum = 0.0;
      for (std::size_t n = 0; n < order; ++n) sum += modes[n][i] - multipliers[n][i] / mu;
      x[i] = sum / static_cast<double>(order);
    }
    for (std::size_t n = 0; n < order; ++n) {
      for (std::size_t i = 0; i < x.size(); ++i) multipliers[n][i] += mu * (x[i] - modes[n][i]);
      residuals.push_back(frobenius_norm(x - modes[n]));
    }
    mu *= config.rho;

    IterationRecord record{max_abs_diff(x, previous), std::move(residuals), fidelity_residual(x, obs)};
    report.history.push_back(std::move(record));
    report.iterations = k;
    if (!all_finite(x) || !record_is_finite(report.history.back())) {
      report.wall_time = elapsed();
      throw DivergenceError(k, std::move(report));
    }
    if (report.history.back().change <= config.eps && any_nonzero) {
      report.converged = true;
      break;
    }
  }
  report.wall_time = elapsed();
  return {std::move(x), std::move(report)};
}

}  // namespace qrtc
