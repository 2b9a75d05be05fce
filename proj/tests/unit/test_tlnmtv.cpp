#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "qrtc/errors.hpp"
#include "qrtc/tlnm.hpp"
#include "qrtc/tlnmtv.hpp"

using namespace qrtc;
using qrtc::testing::naive_psnr;
using qrtc::testing::piecewise_constant_cube;
using qrtc::testing::random_matrix;
using qrtc::testing::random_tensor;
using qrtc::testing::random_tucker;
using qrtc::testing::relative_error;
using qrtc::testing::shuffled_mask;

namespace {

Observation full_observation(const DenseTensor& t) { return Observation::sample(t, Mask(t.dims(), 1)); }

// Dense reference for (mu2 F^T F + mu3 I).
Matrix shifted_system(std::size_t n, double mu2, double mu3) {
  const Matrix f = difference_matrix(n);
  return mu2 * f.transpose() * f + mu3 * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

}  // namespace

TEST(DifferenceMatrix, Examples) {
  Matrix expected(2, 3);
  expected << 1, -1, 0, 0, 1, -1;
  EXPECT_EQ(difference_matrix(3), expected);
  const Matrix f = difference_matrix(6);
  EXPECT_EQ((f * Eigen::VectorXd::Constant(6, 2.5)).norm(), 0.0);
  EXPECT_EQ(f * Eigen::VectorXd::LinSpaced(6, 1, 6), Eigen::VectorXd::Constant(5, -1.0));
  EXPECT_THROW(difference_matrix(1), ArgumentError);
}

TEST(DifferenceMatrix, MatrixFreeApplicationAgreesWithDenseProduct) {
  std::mt19937_64 rng(50);
  const Matrix a = random_matrix(rng, 7, 4);
  const Matrix y = random_matrix(rng, 6, 4);
  const Matrix f = difference_matrix(7);
  EXPECT_LE((apply_difference(a) - f * a).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((apply_difference_transpose(y) - f.transpose() * y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Shrinkage, Examples) {
  EXPECT_EQ(shrinkage(Matrix::Constant(1, 1, 5.0), 2.0)(0, 0), 3.0);
  EXPECT_EQ(shrinkage(Matrix::Constant(1, 1, -1.5), 2.0)(0, 0), 0.0);
  Matrix x(1, 2);
  x << -3, 0.5;
  Matrix expected(1, 2);
  expected << -2, 0;
  EXPECT_EQ(shrinkage(x, 1.0), expected);
  EXPECT_EQ(shrinkage(Matrix::Zero(2, 2), 0.0), Matrix::Zero(2, 2));
}

TEST(ShiftedDifferenceSystem, ResidualIsTiny) {
  std::mt19937_64 rng(51);
  for (std::size_t n : {1u, 2u, 3u, 10u, 40u}) {
    const Matrix rhs = random_matrix(rng, static_cast<Eigen::Index>(n), 5);
    const Matrix a = solve_shifted_difference_system(3.0, 0.7, rhs);
    const Matrix system = n >= 2 ? shifted_system(n, 3.0, 0.7) : Matrix::Constant(1, 1, 0.7);
    EXPECT_LE((system * a - rhs).norm() / rhs.norm(), 1e-10) << "n=" << n;
  }
}

TEST(ShiftedDifferenceSystem, ZeroCouplingDividesByShift) {
  const Matrix rhs = Matrix::Constant(4, 2, 3.0);
  EXPECT_EQ(solve_shifted_difference_system(0.0, 1.5, rhs), Matrix::Constant(4, 2, 2.0));
}

TEST(ShiftedDifferenceSystem, TwoByTwoClosedForm) {
  // [[mu2+mu3, -mu2], [-mu2, mu2+mu3]]^{-1} = [[mu2+mu3, mu2], [mu2, mu2+mu3]] / (mu3 (2 mu2 + mu3))
  const double mu2 = 2.0, mu3 = 0.5;
  Matrix rhs(2, 1);
  rhs << 1.0, -4.0;
  const double det = mu3 * (2 * mu2 + mu3);
  Matrix expected(2, 1);
  expected << ((mu2 + mu3) * 1.0 + mu2 * -4.0) / det, (mu2 * 1.0 + (mu2 + mu3) * -4.0) / det;
  EXPECT_LE((solve_shifted_difference_system(mu2, mu3, rhs) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TlnmTvConfig, DefaultsAndValidation) {
  const Dims dims{10, 12, 5};
  const TlnmTvConfig c = TlnmTvConfig::defaults(dims);
  EXPECT_EQ(c.betas, (std::vector<int>{1, 1, 0}));
  EXPECT_EQ(c.lambda, 1.0);
  for (double mu : c.mus) EXPECT_EQ(mu, 1e-4);
  EXPECT_NO_THROW(c.validate(dims));
  auto bad = [&](auto mutate, const Dims& d) {
    TlnmTvConfig x = TlnmTvConfig::defaults(d);
    mutate(x);
    EXPECT_THROW(x.validate(d), ArgumentError);
  };
  bad([](TlnmTvConfig& x) { x.betas = {1, 2, 0}; }, dims);
  bad([](TlnmTvConfig& x) { x.betas = {1, 1}; }, dims);
  bad([](TlnmTvConfig& x) { x.mus[3] = 0.0; }, dims);
  bad([](TlnmTvConfig& x) { x.lambda = 0.0; }, dims);
  bad([](TlnmTvConfig& x) { x.rho = 0.5; }, dims);
  bad([](TlnmTvConfig& x) { x.betas = {0, 0, 1}; }, Dims{4, 4, 1});
}

TEST(UpdateTvSlack, DisabledModeIsZero) {
  std::mt19937_64 rng(52);
  const DenseTensor t = random_tensor(rng, {5, 4, 3});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.tv_slack[2].setOnes();
  update_tv_slack(s, c, 3);
  EXPECT_EQ(s.tv_slack[2].norm(), 0.0);
}

TEST(UpdateTvSlack, ZeroWeightPassesDifferencesThrough) {
  std::mt19937_64 rng(53);
  const DenseTensor t = random_tensor(rng, {5, 4, 3});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.slack_multipliers[0] = random_matrix(rng, 4, 12);
  c.lambda = 0.0;
  update_tv_slack(s, c, 1);
  const Matrix expected = apply_difference(unfold(t, 1)) - s.slack_multipliers[0] / s.mus[1];
  EXPECT_EQ(s.tv_slack[0], expected);
}

TEST(UpdateTvSlack, PiecewiseConstantCopyBelowThresholdGivesZero) {
  DenseTensor t({6, 3, 2});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (i % 6) < 3 ? 0.2 : 0.9;
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.mus[1] = 1.0;
  c.lambda = 1.0;  // above the single jump of 0.7
  update_tv_slack(s, c, 1);
  EXPECT_EQ(s.tv_slack[0].norm(), 0.0);
}

TEST(UpdateTvSlack, SatisfiesSoftThresholdOptimality) {
  std::mt19937_64 rng(54);
  const DenseTensor t = random_tensor(rng, {6, 5, 4});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.mus[1] = 2.0;
  c.lambda = 1.1;
  s.slack_multipliers[1] = random_matrix(rng, 4, 24);
  update_tv_slack(s, c, 2);
  const Matrix v = apply_difference(s.unfolding_copies[1]) - s.slack_multipliers[1] / s.mus[1];
  const double thr = c.lambda / s.mus[1];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double q = s.tv_slack[1](i);
    // 0 in thr * d|q| + (q - v)
    if (q != 0.0)
      EXPECT_NEAR(q - v(i) + thr * (q > 0 ? 1.0 : -1.0), 0.0, 1e-10);
    else
      EXPECT_LE(std::abs(v(i)), thr + 1e-10);
  }
}

TEST(UpdateFactorsTv, BitwiseMatchesTlnmKernel) {
  std::mt19937_64 rng(55);
  const DenseTensor t = random_tensor(rng, {6, 5, 4});
  const Observation obs = full_observation(t);
  TlnmConfig a = TlnmConfig::defaults(t.dims());
  a.ranks = {3, 3, 3};
  TlnmTvConfig b = TlnmTvConfig::defaults(t.dims());
  b.ranks = a.ranks;
  TlnmState sa = TlnmState::initial(obs, a);
  TlnmTvState sb = TlnmTvState::initial(obs, b);
  sa.mu = sb.mus[4] = 3.0;
  const Matrix phi = random_matrix(rng, 5, 24);
  sa.factor_multipliers[1] = sb.factor_multipliers[1] = phi;
  update_factors(sa, a, 2);
  update_factors_tv(sb, b, 2);
  EXPECT_EQ(sa.factors[1].left, sb.factors[1].left);
  EXPECT_EQ(sa.factors[1].core, sb.factors[1].core);
  EXPECT_EQ(sa.factors[1].right, sb.factors[1].right);
  EXPECT_EQ(sa.low_rank[1], sb.low_rank[1]);
}

TEST(UpdateFactorsTv, ExactLowRankConsensusIsReconstructed) {
  std::mt19937_64 rng(56);
  const DenseTensor t = random_tucker(rng, {9, 8, 7}, 2);
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  c.ranks = {2, 2, 2};
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.mus[4] = 1e12;
  for (int k = 0; k < 5; ++k) update_factors_tv(s, c, 3);
  EXPECT_LE((s.low_rank[2] - unfold(t, 3)).norm() / unfold(t, 3).norm(), 1e-8);
}

TEST(UpdateConsensus, EqualPenaltiesAtTruthReturnX) {
  std::mt19937_64 rng(57);
  const DenseTensor t = random_tensor(rng, {4, 3, 2});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.low_rank[0] = unfold(t, 1);
  s.consensus[0] = DenseTensor(t.dims());
  update_consensus(s, 1);
  EXPECT_LE(max_abs_diff(s.consensus[0], t), 1e-15);
}

TEST(UpdateConsensus, ScalarSubstitution) {
  const Dims dims{2, 2, 2};
  TlnmTvConfig c = TlnmTvConfig::defaults(dims);
  TlnmTvState s = TlnmTvState::initial(full_observation(DenseTensor::filled(dims, 2.0)), c);
  s.mus = {1.0, 1.0, 1.0, 1.0, 3.0};
  s.consensus_multipliers[1] = DenseTensor::filled(dims, 0.5);
  s.low_rank[1].setConstant(4.0);
  s.factor_multipliers[1].setConstant(1.5);
  update_consensus(s, 2);
  // (1*2 - 0.5 + 3*4 - 1.5) / (1 + 3) = 3
  for (double v : s.consensus[1].data()) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(UpdateUnfoldingCopy, DisabledModeIsShiftedUnfolding) {
  std::mt19937_64 rng(58);
  const DenseTensor t = random_tensor(rng, {4, 3, 5});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.copy_multipliers[2] = random_matrix(rng, 5, 12);
  update_unfolding_copy(s, c, 3);
  EXPECT_LE((s.unfolding_copies[2] - (unfold(t, 3) - s.copy_multipliers[2] / s.mus[2])).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(UpdateUnfoldingCopy, SolvesTheShiftedSystem) {
  std::mt19937_64 rng(59);
  const DenseTensor t = random_tensor(rng, {6, 4, 3});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.mus = {0.3, 2.0, 0.7, 1.0, 1.0};
  s.tv_slack[0] = random_matrix(rng, 5, 12);
  s.slack_multipliers[0] = random_matrix(rng, 5, 12);
  s.copy_multipliers[0] = random_matrix(rng, 6, 12);
  update_unfolding_copy(s, c, 1);
  const Matrix f = difference_matrix(6);
  const Matrix rhs = f.transpose() * (s.slack_multipliers[0] + 2.0 * s.tv_slack[0]) + 0.7 * unfold(t, 1) -
                     s.copy_multipliers[0];
  EXPECT_LE((shifted_system(6, 2.0, 0.7) * s.unfolding_copies[0] - rhs).norm() / rhs.norm(), 1e-10);
}

TEST(UpdateGlobalTv, NoTvModesAtTruthCombinesConsensusAndFidelity) {
  std::mt19937_64 rng(60);
  const DenseTensor t = random_tensor(rng, {4, 3, 3});
  const Observation obs = Observation::sample(t, shuffled_mask(rng, t.dims(), 0.5));
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  c.betas = {0, 0, 0};
  TlnmTvState s = TlnmTvState::initial(obs, c);
  s.mus = {0.5, 1.0, 1.0, 2.0, 1.0};
  for (auto& z : s.consensus) z = t;
  update_global_tv(s, c, obs);
  // On Omega: (3 * 0.5 * t + 2 t) / (3 * 0.5 + 2) = t; off Omega: t.
  EXPECT_LE(max_abs_diff(s.estimate, t), 1e-14);
}

TEST(UpdateGlobalTv, DenominatorsDifferByFidelityPenalty) {
  const Dims dims{3, 3, 2};
  Mask mask(dims);
  mask.set(0, true);
  const Observation obs(DenseTensor(dims), mask);
  TlnmTvConfig c = TlnmTvConfig::defaults(dims);  // betas (1, 1, 0)
  TlnmTvState s = TlnmTvState::initial(obs, c);
  s.mus = {1.0, 1.0, 2.0, 5.0, 1.0};
  for (auto& z : s.consensus) z = DenseTensor::filled(dims, 1.0);
  for (std::size_t n = 0; n < 3; ++n) s.unfolding_copies[n].setOnes();
  update_global_tv(s, c, obs);
  // numerator 3*1 + 2*(2*1) = 7 everywhere; weights 3 + 2*2 = 7, plus 5 on Omega.
  EXPECT_DOUBLE_EQ(s.estimate[1], 1.0);
  EXPECT_DOUBLE_EQ(s.estimate[0], 7.0 / 12.0);
}

TEST(UpdateMultipliersTv, ZeroResidualsAndPenaltyGrowth) {
  std::mt19937_64 rng(61);
  const DenseTensor t = random_tensor(rng, {4, 3, 3});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  for (std::size_t n = 0; n < 3; ++n) {
    s.low_rank[n] = unfold(t, n + 1);
    s.tv_slack[n] = apply_difference(s.unfolding_copies[n]);
  }
  const TlnmTvState before = s;
  update_multipliers_tv(s, c, full_observation(t));
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(s.consensus_multipliers[n], before.consensus_multipliers[n]);
    EXPECT_EQ(s.slack_multipliers[n], before.slack_multipliers[n]);
    EXPECT_EQ(s.copy_multipliers[n], before.copy_multipliers[n]);
    EXPECT_EQ(s.factor_multipliers[n], before.factor_multipliers[n]);
  }
  EXPECT_EQ(s.fidelity_multiplier, before.fidelity_multiplier);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(s.mus[i], 1.05 * before.mus[i]);
  c.rho = 1.0;
  const auto grown = s.mus;
  update_multipliers_tv(s, c, full_observation(t));
  EXPECT_EQ(s.mus, grown);
}

TEST(UpdateMultipliersTv, UnitResidualMovesOnlyItsMultiplier) {
  const Dims dims{3, 3, 2};
  const DenseTensor t = DenseTensor::filled(dims, 1.0);
  TlnmTvConfig c = TlnmTvConfig::defaults(dims);
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.mus = {0.1, 0.2, 0.3, 0.4, 0.5};
  for (std::size_t n = 0; n < 3; ++n) s.low_rank[n] = unfold(t, n + 1);
  s.tv_slack[0](0, 0) = 1.0;  // slack residual Q - F A = 1 at one entry
  update_multipliers_tv(s, c, full_observation(t));
  EXPECT_DOUBLE_EQ(s.slack_multipliers[0](0, 0), 0.2);
  EXPECT_DOUBLE_EQ(s.slack_multipliers[0].cwiseAbs().sum(), 0.2);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(frobenius_norm(s.consensus_multipliers[n]), 0.0);
    EXPECT_EQ(s.copy_multipliers[n].norm(), 0.0);
    EXPECT_EQ(s.factor_multipliers[n].norm(), 0.0);
  }
  EXPECT_EQ(frobenius_norm(s.fidelity_multiplier), 0.0);
}

TEST(UpdateMultipliersTv, DisabledModesKeepSlackAndCopyMultipliersFrozen) {
  std::mt19937_64 rng(62);
  const DenseTensor t = random_tensor(rng, {4, 3, 3});
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  TlnmTvState s = TlnmTvState::initial(full_observation(t), c);
  s.tv_slack[2].setOnes();
  s.unfolding_copies[2].setZero();
  update_multipliers_tv(s, c, full_observation(t));
  EXPECT_EQ(s.slack_multipliers[2].norm(), 0.0);
  EXPECT_EQ(s.copy_multipliers[2].norm(), 0.0);
}

TEST(SolveTlnmTv, NoTvModesStaysCloseToTlnm) {
  std::mt19937_64 rng(63);
  const DenseTensor t = random_tucker(rng, {20, 20, 20}, 2);
  const Observation obs = Observation::sample(t, shuffled_mask(rng, t.dims(), 0.6));
  TlnmConfig a = TlnmConfig::defaults(t.dims());
  a.ranks = {4, 4, 4};
  TlnmTvConfig b = TlnmTvConfig::defaults(t.dims());
  b.ranks = a.ranks;
  b.betas = {0, 0, 0};
  const SolveResult ra = solve_tlnm(obs, a);
  const SolveResult rb = solve_tlnmtv(obs, b);
  EXPECT_LE(relative_error(rb.completed, t), std::max(2 * relative_error(ra.completed, t), 1e-2));
}

TEST(SolveTlnmTv, NoTvModesContributeNoTvTerm) {
  std::mt19937_64 rng(64);
  const DenseTensor t = random_tensor(rng, {6, 5, 4});
  const Observation obs = Observation::sample(t, shuffled_mask(rng, t.dims(), 0.5));
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  c.betas = {0, 0, 0};
  TlnmTvState s = TlnmTvState::initial(obs, c);
  for (int k = 0; k < 5; ++k) {
    for (std::size_t n = 1; n <= 3; ++n) update_tv_slack(s, c, n);
    EXPECT_EQ(tv_objective(s, c), 0.0);
  }
}

TEST(SolveTlnmTv, TvHelpsOnBlockyCube) {
  std::mt19937_64 rng(65);
  const DenseTensor t = piecewise_constant_cube(rng, 30);
  const Observation obs = Observation::sample(t, shuffled_mask(rng, t.dims(), 0.1));
  const TlnmConfig a = TlnmConfig::defaults(t.dims());
  TlnmTvConfig b = TlnmTvConfig::defaults(t.dims());
  b.betas = {1, 1, 0};
  const double gain = naive_psnr(t, solve_tlnmtv(obs, b).completed) - naive_psnr(t, solve_tlnm(obs, a).completed);
  EXPECT_GE(gain, 0.5);
}

TEST(SolveTlnmTv, DeterministicAndOrthogonalThroughout) {
  std::mt19937_64 rng(66);
  const DenseTensor t = random_tucker(rng, {10, 9, 8}, 2);
  const Observation obs = Observation::sample(t, shuffled_mask(rng, t.dims(), 0.5));
  TlnmTvConfig c = TlnmTvConfig::defaults(t.dims());
  c.max_iters = 40;
  const SolveResult a = solve_tlnmtv(obs, c);
  const SolveResult b = solve_tlnmtv(obs, c);
  EXPECT_EQ(a.completed, b.completed);
  EXPECT_EQ(a.report.history, b.report.history);

  TlnmTvState s = TlnmTvState::initial(obs, c);
  for (int k = 0; k < 40; ++k) {
    for (std::size_t n = 1; n <= 3; ++n) {
      update_tv_slack(s, c, n);
      update_factors_tv(s, c, n);
      update_consensus(s, n);
      update_unfolding_copy(s, c, n);
      EXPECT_LE(left_orthogonality_error(s.factors[n - 1]), 1e-8);
      EXPECT_LE(right_orthogonality_error(s.factors[n - 1]), 1e-8);
    }
    update_global_tv(s, c, obs);
    update_multipliers_tv(s, c, obs);
  }
}

TEST(SolveTlnmTv, FidelityResidualDecreasesOnSyntheticInstance) {
  std::mt19937_64 rng(67);
  const DenseTensor t = random_tucker(rng, {12, 12, 12}, 2);
  const Observation obs = Observation::sample(t, shuffled_mask(rng, t.dims(), 0.6));
  const SolveResult r = solve_tlnmtv(obs, TlnmTvConfig::defaults(t.dims()));
  EXPECT_LE(r.report.history.back().fidelity_residual, r.report.history.front().fidelity_residual);
  EXPECT_EQ(r.report.history.size(), r.report.iterations);
}
