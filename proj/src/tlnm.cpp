#include "qrtc/tlnm.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "qrtc/errors.hpp"

namespace qrtc {

namespace {

std::size_t mode_index(const TlnmState& state, std::size_t mode) {
  if (mode < 1 || mode > state.mode_tensors.size()) throw ArgumentError("mode out of range");
  return mode - 1;
}

}  // namespace

TlnmConfig TlnmConfig::defaults(const Dims& dims) {
  TlnmConfig c;
  c.alphas = uniform_alphas(dims.size());
  c.ranks = default_ranks(dims);
  return c;
}

void TlnmConfig::validate(const Dims& dims) const {
  const std::size_t order = dims.size();
  if (alphas.size() != order) throw ArgumentError("alphas must have one entry per mode");
  if (ranks.size() != order) throw ArgumentError("ranks must have one entry per mode");
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ArgumentError("alphas must be nonnegative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("alphas must sum to 1");
  const std::size_t total = element_count(dims);
  for (std::size_t n = 0; n < order; ++n) {
    const std::size_t bound = std::min(dims[n], total / dims[n]);
    if (ranks[n] < 1 || ranks[n] > bound)
      throw ArgumentError("rank for mode " + std::to_string(n + 1) + " must lie in 1.." + std::to_string(bound));
  }
  if (!(mu0 > 0.0)) throw ArgumentError("mu0 must be positive");
  if (!(rho >= 1.0)) throw ArgumentError("rho must be at least 1");
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  if (max_iters < 1) throw ArgumentError("max_iters must be at least 1");
}

TlnmState TlnmState::initial(const Observation& obs, const TlnmConfig& config) {
  const Dims& dims = obs.values.dims();
  config.validate(dims);
  const std::size_t order = dims.size();
  const std::size_t total = element_count(dims);

  TlnmState s;
  s.estimate = obs.values;
  s.fidelity_multiplier = DenseTensor(dims);
  s.mu = config.mu0;
  for (std::size_t n = 0; n < order; ++n) {
    const std::size_t rows = dims[n];
    const std::size_t cols = total / rows;
    s.mode_tensors.push_back(s.estimate);
    s.factors.push_back(LdrFactors::identity(rows, cols, config.ranks[n]));
    s.low_rank.push_back(s.factors.back().product());
    s.consensus_multipliers.emplace_back(dims);
    s.factor_multipliers.push_back(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
  }
  return s;
}

void update_factors(TlnmState& state, const TlnmConfig& config, std::size_t mode) {
  const std::size_t n = mode_index(state, mode);
  const Matrix target = unfold(state.mode_tensors[n], mode) + state.factor_multipliers[n] / state.mu;
  if (!target.allFinite()) throw DivergenceError(0, {});
  try {
    state.low_rank[n] = shrink_sweep(target, state.factors[n], config.alphas[n] / state.mu);
  } catch (const ArgumentError&) {
    throw DivergenceError(0, {});  // overflow inside the sweep
  }
}

void update_mode_tensor(TlnmState& state, std::size_t mode) {
  const std::size_t n = mode_index(state, mode);
  const double inv_mu = 1.0 / state.mu;
  const Matrix m = 0.5 * (unfold(state.estimate, mode) - inv_mu * unfold(state.consensus_multipliers[n], mode) +
                          state.low_rank[n] - inv_mu * state.factor_multipliers[n]);
  state.mode_tensors[n] = fold(m, mode, state.estimate.dims());
}

void update_global(TlnmState& state, const Observation& obs) {
  const std::size_t order = state.mode_tensors.size();
  const double mu = state.mu;
  DenseTensor sum(state.estimate.dims());
  for (std::size_t n = 0; n < order; ++n) {
    const auto m = state.mode_tensors[n].data();
    const auto q = state.consensus_multipliers[n].data();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += mu * m[i] + q[i];
  }
  const double observed_denominator = static_cast<double>(order + 1) * mu;
  const double missing_denominator = static_cast<double>(order) * mu;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (obs.mask.observed(i))
      state.estimate[i] = (sum[i] + mu * obs.values[i] - state.fidelity_multiplier[i]) / observed_denominator;
    else
      state.estimate[i] = sum[i] / missing_denominator;
  }
}

void update_multipliers(TlnmState& state, const Observation& obs, const TlnmConfig& config) {
  const double mu = state.mu;
  for (std::size_t n = 0; n < state.mode_tensors.size(); ++n) {
    DenseTensor& q = state.consensus_multipliers[n];
    const DenseTensor& m = state.mode_tensors[n];
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += mu * (m[i] - state.estimate[i]);
    state.factor_multipliers[n] += mu * (unfold(m, n + 1) - state.low_rank[n]);
  }
  for (std::size_t i = 0; i < state.estimate.size(); ++i)
    if (obs.mask.observed(i)) state.fidelity_multiplier[i] += mu * (state.estimate[i] - obs.values[i]);
  state.mu = config.rho * mu;
}

double l21_objective(const TlnmState& state, const TlnmConfig& config) {
  double sum = 0.0;
  for (std::size_t n = 0; n < state.factors.size(); ++n) sum += config.alphas[n] * l21_norm(state.factors[n].core);
  return sum;
}

SolveResult solve_tlnm(const Observation& obs, const TlnmConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  TlnmState state = TlnmState::initial(obs, config);
  const std::size_t order = state.mode_tensors.size();
  SolverReport report;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    const DenseTensor previous = state.estimate;
    try {
      for (std::size_t mode = 1; mode <= order; ++mode) {
        update_factors(state, config, mode);
        update_mode_tensor(state, mode);
      }
    } catch (const DivergenceError&) {
      report.wall_time = elapsed();
      throw DivergenceError(k, std::move(report));
    }
    update_global(state, obs);

    IterationRecord record;
    record.change = max_abs_diff(state.estimate, previous);
    for (std::size_t n = 0; n < order; ++n)
      record.factor_residual.push_back((unfold(state.mode_tensors[n], n + 1) - state.low_rank[n]).norm());
    record.fidelity_residual = fidelity_residual(state.estimate, obs);

    update_multipliers(state, obs, config);
    report.history.push_back(std::move(record));
    report.iterations = k;

    if (!all_finite(state.estimate) || !record_is_finite(report.history.back())) {
      report.wall_time = elapsed();
      throw DivergenceError(k, std::move(report));
    }
    // While every core is shrunk to zero the iteration sits on a trivial
    // fixed point of the small-penalty map; the change test is not armed there.
    if (report.history.back().change <= config.eps && l21_objective(state, config) > 0.0) {
      report.converged = true;
      break;
    }
  }
  report.wall_time = elapsed();
  return {std::move(state.estimate), std::move(report)};
}

}  // namespace qrtc
