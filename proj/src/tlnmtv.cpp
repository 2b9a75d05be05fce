#include "qrtc/tlnmtv.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "qrtc/errors.hpp"

namespace qrtc {

namespace {

std::size_t mode_index(const TlnmTvState& state, std::size_t mode) {
  if (mode < 1 || mode > state.consensus.size()) throw ArgumentError("mode out of range");
  return mode - 1;
}

bool tv_on(const TlnmTvConfig& config, std::size_t n) { return config.betas[n] != 0; }

}  // namespace

TlnmTvConfig TlnmTvConfig::defaults(const Dims& dims) {
  TlnmTvConfig c;
  c.alphas = uniform_alphas(dims.size());
  c.ranks = default_ranks(dims);
  c.betas.assign(dims.size(), 0);
  for (std::size_t n = 0; n < std::min<std::size_t>(2, dims.size()); ++n) c.betas[n] = dims[n] >= 2 ? 1 : 0;
  return c;
}

void TlnmTvConfig::validate(const Dims& dims) const {
  const std::size_t order = dims.size();
  if (alphas.size() != order) throw ArgumentError("alphas must have one entry per mode");
  if (ranks.size() != order) throw ArgumentError("ranks must have one entry per mode");
  if (betas.size() != order) throw ArgumentError("betas must have one entry per mode");
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
    if (betas[n] != 0 && betas[n] != 1) throw ArgumentError("betas must be 0 or 1");
    if (betas[n] == 1 && dims[n] < 2) throw ArgumentError("TV needs extent >= 2 on mode " + std::to_string(n + 1));
  }
  for (double mu : mus)
    if (!(mu > 0.0)) throw ArgumentError("all penalties must be positive");
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  if (!(rho >= 1.0)) throw ArgumentError("rho must be at least 1");
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  if (max_iters < 1) throw ArgumentError("max_iters must be at least 1");
}

TlnmTvState TlnmTvState::initial(const Observation& obs, const TlnmTvConfig& config) {
  const Dims& dims = obs.values.dims();
  config.validate(dims);
  const std::size_t total = element_count(dims);

  TlnmTvState s;
  s.estimate = obs.values;
  s.fidelity_multiplier = DenseTensor(dims);
  s.mus = config.mus;
  for (std::size_t n = 0; n < dims.size(); ++n) {
    const auto rows = static_cast<Eigen::Index>(dims[n]);
    const auto cols = static_cast<Eigen::Index>(total / dims[n]);
    s.consensus.push_back(s.estimate);
    s.unfolding_copies.push_back(unfold(s.estimate, n + 1));
    s.tv_slack.push_back(Matrix::Zero(rows - 1, cols));
    s.factors.push_back(LdrFactors::identity(dims[n], total / dims[n], config.ranks[n]));
    s.low_rank.push_back(s.factors.back().product());
    s.consensus_multipliers.emplace_back(dims);
    s.slack_multipliers.push_back(Matrix::Zero(rows - 1, cols));
    s.copy_multipliers.push_back(Matrix::Zero(rows, cols));
    s.factor_multipliers.push_back(Matrix::Zero(rows, cols));
  }
  return s;
}

Matrix difference_matrix(std::size_t size) {
  if (size < 2) throw ArgumentError("difference_matrix: size must be at least 2");
  const auto n = static_cast<Eigen::Index>(size);
  Matrix f = Matrix::Zero(n - 1, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    f(i, i) = 1.0;
    f(i, i + 1) = -1.0;
  }
  return f;
}

Matrix shrinkage(const Matrix& x, double alpha) {
  if (alpha < 0.0) throw ArgumentError("shrinkage: alpha must be nonnegative");
  return x.unaryExpr([alpha](double v) {
    const double magnitude = std::abs(v) - alpha;
    if (magnitude <= 0.0) return 0.0;
    return v > 0.0 ? magnitude : -magnitude;
  });
}

Matrix apply_difference(const Matrix& a) {
  const auto rows = a.rows();
  if (rows < 1) throw ArgumentError("apply_difference: empty input");
  return a.topRows(rows - 1) - a.bottomRows(rows - 1);
}

Matrix apply_difference_transpose(const Matrix& y) {
  const auto rows = y.rows() + 1;
  Matrix out = Matrix::Zero(rows, y.cols());
  out.topRows(rows - 1) += y;
  out.bottomRows(rows - 1) -= y;
  return out;
}

Matrix solve_shifted_difference_system(double mu2, double mu3, const Matrix& rhs) {
  if (!(mu3 > 0.0) || mu2 < 0.0) throw ArgumentError("shifted difference system needs mu2 >= 0, mu3 > 0");
  const auto n = rhs.rows();
  if (n < 1) return rhs;
  // LDL^T of the tridiagonal matrix with diagonal mu2*c_i + mu3 (c = 1,2,...,2,1)
  // and off-diagonal -mu2.
  const double off = -mu2;
  Eigen::VectorXd pivot(n);
  Eigen::VectorXd lower(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double coupling = 0.0;
    if (i > 0) ++coupling;
    if (i + 1 < n) ++coupling;
    const double diag = mu2 * coupling + mu3;
    if (i == 0) {
      lower(i) = 0.0;
      pivot(i) = diag;
    } else {
      lower(i) = off / pivot(i - 1);
      pivot(i) = diag - lower(i) * off;
    }
  }
  Matrix x = rhs;
  for (Eigen::Index i = 1; i < n; ++i) x.row(i) -= lower(i) * x.row(i - 1);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) /= pivot(i);
  for (Eigen::Index i = n - 2; i >= 0; --i) x.row(i) -= lower(i + 1) * x.row(i + 1);
  return x;
}

void update_tv_slack(TlnmTvState& state, const TlnmTvConfig& config, std::size_t mode) {
  const std::size_t n = mode_index(state, mode);
  Matrix& slack = state.tv_slack[n];
  if (!tv_on(config, n)) {
    slack.setZero();
    return;
  }
  const double mu2 = state.mus[1];
  slack = shrinkage(apply_difference(state.unfolding_copies[n]) - state.slack_multipliers[n] / mu2, config.lambda / mu2);
}

void update_factors_tv(TlnmTvState& state, const TlnmTvConfig& config, std::size_t mode) {
  const std::size_t n = mode_index(state, mode);
  const double mu5 = state.mus[4];
  const Matrix target = unfold(state.consensus[n], mode) + state.factor_multipliers[n] / mu5;
  if (!target.allFinite()) throw DivergenceError(0, {});
  try {
    state.low_rank[n] = shrink_sweep(target, state.factors[n], config.alphas[n] / mu5);
  } catch (const ArgumentError&) {
    throw DivergenceError(0, {});  // overflow inside the sweep
  }
}

void update_consensus(TlnmTvState& state, std::size_t mode) {
  const std::size_t n = mode_index(state, mode);
  const double mu1 = state.mus[0];
  const double mu5 = state.mus[4];
  const Matrix z = (mu1 * unfold(state.estimate, mode) - unfold(state.consensus_multipliers[n], mode) +
                    mu5 * state.low_rank[n] - state.factor_multipliers[n]) /
                   (mu1 + mu5);
  state.consensus[n] = fold(z, mode, state.estimate.dims());
}

void update_unfolding_copy(TlnmTvState& state, const TlnmTvConfig& config, std::size_t mode) {
  const std::size_t n = mode_index(state, mode);
  const double mu2 = state.mus[1];
  const double mu3 = state.mus[2];
  const Matrix x = unfold(state.estimate, mode);
  if (!tv_on(config, n)) {
    state.unfolding_copies[n] = x - state.copy_multipliers[n] / mu3;
    return;
  }
  const Matrix rhs = apply_difference_transpose(state.slack_multipliers[n] + mu2 * state.tv_slack[n]) + mu3 * x -
                     state.copy_multipliers[n];
  state.unfolding_copies[n] = solve_shifted_difference_system(mu2, mu3, rhs);
}

void update_global_tv(TlnmTvState& state, const TlnmTvConfig& config, const Observation& obs) {
  const Dims& dims = state.estimate.dims();
  const double mu1 = state.mus[0];
  const double mu3 = state.mus[2];
  const double mu4 = state.mus[3];
  DenseTensor sum(dims);
  double weight = 0.0;
  for (std::size_t n = 0; n < state.consensus.size(); ++n) {
    const auto z = state.consensus[n].data();
    const auto g = state.consensus_multipliers[n].data();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += mu1 * z[i] + g[i];
    weight += mu1;
    if (tv_on(config, n)) {
      sum += fold(mu3 * state.unfolding_copies[n] + state.copy_multipliers[n], n + 1, dims);
      weight += mu3;
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (obs.mask.observed(i))
      state.estimate[i] = (sum[i] + mu4 * obs.values[i] - state.fidelity_multiplier[i]) / (weight + mu4);
    else
      state.estimate[i] = sum[i] / weight;
  }
}

void update_multipliers_tv(TlnmTvState& state, const TlnmTvConfig& config, const Observation& obs) {
  const auto& mu = state.mus;
  for (std::size_t n = 0; n < state.consensus.size(); ++n) {
    DenseTensor& g = state.consensus_multipliers[n];
    const DenseTensor& z = state.consensus[n];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += mu[0] * (z[i] - state.estimate[i]);
    if (tv_on(config, n)) {
      state.slack_multipliers[n] += mu[1] * (state.tv_slack[n] - apply_difference(state.unfolding_copies[n]));
      state.copy_multipliers[n] += mu[2] * (state.unfolding_copies[n] - unfold(state.estimate, n + 1));
    }
    state.factor_multipliers[n] += mu[4] * (unfold(z, n + 1) - state.low_rank[n]);
  }
  for (std::size_t i = 0; i < state.estimate.size(); ++i)
    if (obs.mask.observed(i)) state.fidelity_multiplier[i] += mu[3] * (state.estimate[i] - obs.values[i]);
  for (double& m : state.mus) m *= config.rho;
}

double tv_objective(const TlnmTvState& state, const TlnmTvConfig& config) {
  double sum = 0.0;
  for (std::size_t n = 0; n < state.tv_slack.size(); ++n)
    if (tv_on(config, n)) sum += state.tv_slack[n].cwiseAbs().sum();
  return config.lambda * sum;
}

double l21_objective(const TlnmTvState& state, const TlnmTvConfig& config) {
  double sum = 0.0;
  for (std::size_t n = 0; n < state.factors.size(); ++n) sum += config.alphas[n] * l21_norm(state.factors[n].core);
  return sum;
}

SolveResult solve_tlnmtv(const Observation& obs, const TlnmTvConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  TlnmTvState state = TlnmTvState::initial(obs, config);
  const std::size_t order = state.consensus.size();
  SolverReport report;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    const DenseTensor previous = state.estimate;
    try {
      for (std::size_t mode = 1; mode <= order; ++mode) {
        update_tv_slack(state, config, mode);
        update_factors_tv(state, config, mode);
        update_consensus(state, mode);
        update_unfolding_copy(state, config, mode);
      }
    } catch (const DivergenceError&) {
      report.wall_time = elapsed();
      throw DivergenceError(k, std::move(report));
    }
    update_global_tv(state, config, obs);

    IterationRecord record;
    record.change = max_abs_diff(state.estimate, previous);
    for (std::size_t n = 0; n < order; ++n)
      record.factor_residual.push_back((unfold(state.consensus[n], n + 1) - state.low_rank[n]).norm());
    record.fidelity_residual = fidelity_residual(state.estimate, obs);

    update_multipliers_tv(state, config, obs);
    report.history.push_back(std::move(record));
    report.iterations = k;

    if (!all_finite(state.estimate) || !record_is_finite(report.history.back())) {
      report.wall_time = elapsed();
      throw DivergenceError(k, std::move(report));
    }
    // Same guard as the TLNM solver: no convergence while every core is zero.
    if (report.history.back().change <= config.eps && l21_objective(state, config) > 0.0) {
      report.converged = true;
      break;
    }
  }
  report.wall_time = elapsed();
  return {std::move(state.estimate), std::move(report)};
}

}  // namespace qrtc
