#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tiers/error.hpp"
#include "tiers/simgen.hpp"
#include "tiers/tiers.hpp"

using namespace tiers;

namespace {

ConvolvedData null_conv(std::uint64_t seed, Regime regime = Regime::SL, double c = 2.0,
                        Eigen::Index n = 80, Eigen::Index p = 60) {
  return convolve(gen_regression(regime, c, 0.0, n, p, seed).data);
}

}  // namespace

TEST(EstimatePi, InvariantsHold) {
  const ConvolvedData conv = null_conv(1);
  const double eta = eta_adaptive(conv.w);
  const PiEstimate pe = estimate_pi(conv, eta, 2);
  EXPECT_LT((pe.vhat - (conv.z - conv.w * pe.pi)).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index j = 0; j < conv.p(); ++j) {
    const Vector r = conv.z.col(j) - conv.w * pe.pi.col(j);
    const double corr = (conv.w.transpose() * r).cwiseAbs().maxCoeff() / conv.n();
    const double es = eta * pe.sigma_tilde_cols[j];
    EXPECT_LE(corr, es + feasibility_tolerance(es)) << j;
  }
  EXPECT_EQ(pe.degenerate_count(), 0);
}

TEST(EstimatePi, DegenerateColumnsFlagged) {
  TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.0, 50, 20, 2).data;
  d.x_b.col(3) = d.x_a.col(3);
  d.x_b.col(7) = d.x_a.col(7);
  const ConvolvedData conv = convolve(d);
  const PiEstimate pe = estimate_pi(conv, eta_adaptive(conv.w));
  EXPECT_EQ(pe.degenerate_count(), 2);
  EXPECT_EQ(pe.degenerate[3], 1);
  EXPECT_EQ(pe.pi.col(3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(pe.vhat.col(7).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(pe.sigma_tilde_cols[7], 0.0);
}

TEST(EstimatePi, AllColumnsDegenerateIsAnError) {
  TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.0, 30, 10, 3).data;
  d.x_b = d.x_a;
  EXPECT_THROW(estimate_pi(convolve(d), 0.3), DegenerateFitError);
  EXPECT_THROW(run_tiers(d, 0.05), DegenerateFitError);
}

TEST(EstimatePi, EqualCovariancesShrinkToZero) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ConvolvedData conv = null_conv(100 + seed, Regime::SL, 1.0, 200, 300);
    const PiEstimate pe = estimate_pi(conv, eta_adaptive(conv.w));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < conv.p(); ++j) worst = std::max(worst, pe.pi.col(j).lpNorm<1>());
    if (worst <= 0.5) ++ok;
  }
  EXPECT_GE(ok, 18);
}

TEST(EstimatePi, ProportionalCovariancesDiagonalTendsToOneThird) {
  // Dantzig shrinkage pulls the diagonal well below 1/3 at n = 400; it closes in as eta falls.
  double prev = 0.0;
  for (Eigen::Index n : {400, 1600, 6400}) {
    const ConvolvedData conv = null_conv(5, Regime::SL, 0.5, n, 100);
    const PiEstimate pe = estimate_pi(conv, eta_adaptive(conv.w));
    const double mean_diag = pe.pi.diagonal().mean();
    EXPECT_GT(mean_diag, prev) << n;
    EXPECT_LT(mean_diag, 1.0 / 3.0) << n;
    prev = mean_diag;
  }
  EXPECT_GE(prev, 0.2);
  EXPECT_LE(prev, 0.45);
}

TEST(EstimateTheta, ZeroResponseIsDegenerate) {
  ConvolvedData conv = null_conv(6);
  conv.y.setZero();
  EXPECT_THROW(estimate_theta(conv, 0.3), DegenerateFitError);
}

TEST(EstimateTheta, DoubledResponseDoublesScale) {
  ConvolvedData conv = null_conv(7);
  const double eta = eta_adaptive(conv.w);
  const AddsFit a = estimate_theta(conv, eta);
  conv.y *= 2.0;
  const AddsFit b = estimate_theta(conv, eta);
  EXPECT_NEAR(b.sigma_hat, 2.0 * a.sigma_hat, 1e-7 * a.sigma_hat);
}

TEST(EstimateTheta, NullFixtureScaleBounds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticDataset ds = gen_regression(Regime::SL, 2.0, 0.0, 200, 300, seed);
    const ConvolvedData conv = convolve(ds.data);
    const AddsFit f = estimate_theta(conv, eta_adaptive(conv.w));
    const double sigma_star = (conv.y - conv.w * ds.truth.theta_star).norm() / std::sqrt(200.0);
    EXPECT_GE(f.sigma_hat, sigma_star / std::sqrt(2.0)) << seed;
    EXPECT_LE(f.sigma_hat, 2.0 * sigma_star) << seed;
  }
}

TEST(EstimateTheta, DenseNullFixtureFallsBackToTrivialFit) {
  // A dense unit-norm theta is out of reach at n = 200, p = 300: the fit is (near) zero,
  // so sigma_hat tracks ||Y|| / sqrt(n) rather than the noise level.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticDataset ds = gen_regression(Regime::DL, 2.0, 0.0, 200, 300, seed);
    const ConvolvedData conv = convolve(ds.data);
    const AddsFit f = estimate_theta(conv, eta_adaptive(conv.w));
    const double sigma_star = (conv.y - conv.w * ds.truth.theta_star).norm() / std::sqrt(200.0);
    EXPECT_GE(f.sigma_hat, sigma_star / std::sqrt(2.0)) << seed;
    EXPECT_LE(f.sigma_hat, conv.y.norm() / std::sqrt(200.0) * (1.0 + 1e-12)) << seed;
  }
}

TEST(EstimateThetaPlus, HugeMuMatchesPlainFit) {
  const ConvolvedData conv = null_conv(9);
  const double eta = eta_adaptive(conv.w);
  const AddsFit a = estimate_theta(conv, eta);
  const AddsFit b = estimate_theta_plus(conv, eta, 1e12);
  EXPECT_NEAR(a.sigma_hat, b.sigma_hat, 1e-6 * a.sigma_hat);
  EXPECT_LE((a.b - b.b).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + a.b.cwiseAbs().maxCoeff()));
}

TEST(EstimateThetaPlus, ResidualBoundHolds) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const ConvolvedData conv = null_conv(seed);
    const double eta = eta_adaptive(conv.w);
    const double mu = default_mu(conv.n(), conv.p(), 1.0);
    const AddsFit f = estimate_theta_plus(conv, eta, mu);
    EXPECT_LE(f.residuals.cwiseAbs().maxCoeff(),
              mu * f.sigma_tilde + feasibility_tolerance(mu * f.sigma_tilde));
  }
}

TEST(EstimateThetaPlus, HeavyTailResidualRatio) {
  const SyntheticDataset ds = gen_regression(Regime::SH, 2.0, 0.0, 200, 300, 16);
  const ConvolvedData conv = convolve(ds.data);
  const double mu = default_mu(200, 300, 1.0);
  const AddsFit f = estimate_theta_plus(conv, eta_adaptive(conv.w), mu);
  EXPECT_LE(f.residuals.cwiseAbs().maxCoeff() / f.sigma_hat, std::sqrt(2.0) * mu * (1.0 + 1e-7));
}

TEST(Qhat, SmallCases) {
  PiEstimate pe;
  pe.vhat = Matrix::Zero(4, 3);
  EXPECT_EQ(qhat(pe).cwiseAbs().maxCoeff(), 0.0);
  pe.vhat.row(2) << 1.0, -2.0, 0.5;
  const Vector r = pe.vhat.row(2).transpose();
  EXPECT_LT((qhat(pe) - r * r.transpose() / 4.0).cwiseAbs().maxCoeff(), 1e-15);

  pe.vhat = Matrix(5, 3);
  rng_stream(1, 2).fill_normal(pe.vhat);
  const Matrix q = qhat(pe);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int i = 0; i < 5; ++i) s += pe.vhat(i, a) * pe.vhat(i, b);
      EXPECT_NEAR(q(a, b), s / 5.0, 1e-12);
    }
}

TEST(TestStatistic, HandInstance) {
  ConvolvedData conv{Matrix(3, 2), Matrix(3, 2), Vector(3)};
  conv.w << 1, 2, -1, 0.5, 3, 1;
  conv.z << 0.5, -1, 2, 1, -0.5, 0;
  conv.y << 1, -2, 0.5;
  PiEstimate pe;
  pe.pi = Matrix(2, 2);
  pe.pi << 0.1, 0.0, -0.2, 0.3;
  pe.vhat = conv.z - conv.w * pe.pi;
  AddsFit theta;
  theta.b = Vector(2);
  theta.b << 0.25, -0.5;
  const Vector resid = conv.y - conv.w * theta.b;
  EXPECT_NEAR(test_statistic(conv, pe, theta), oracle::max_moment_loop(pe.vhat, resid), 1e-12);

  pe.vhat.setZero();
  EXPECT_EQ(test_statistic(conv, pe, theta), 0.0);
}

TEST(TestStatistic, ZeroResidualIsDegenerate) {
  ConvolvedData conv{Matrix::Identity(3, 2), Matrix::Identity(3, 2), Vector::Zero(3)};
  PiEstimate pe;
  pe.vhat = conv.z;
  AddsFit theta;
  theta.b = Vector::Zero(2);
  EXPECT_THROW(test_statistic(conv, pe, theta), DegenerateStatisticError);
}

TEST(Simulator, ZeroMatrixGivesZeroCritical) {
  const MaxQuantile q = simulate_max_quantile(Matrix::Zero(10, 4), 0.05, 1000, 1);
  EXPECT_EQ(q.critical_value, 0.0);
}

TEST(Simulator, SingleCoordinateQuantile) {
  const Eigen::Index n = 50;
  Matrix v = Matrix::Zero(n, 3);
  v(0, 0) = std::sqrt(static_cast<double>(n));
  const MaxQuantile q = simulate_max_quantile(v, 0.05, 20000, 3);
  EXPECT_GE(q.critical_value, 1.90);
  EXPECT_LE(q.critical_value, 2.02);
}

TEST(Simulator, CovarianceMatchesQhat) {
  const Eigen::Index n = 30, p = 4;
  PiEstimate pe;
  pe.vhat = Matrix(n, p);
  rng_stream(4, 0).fill_normal(pe.vhat);
  pe.vhat.col(1) += 0.7 * pe.vhat.col(0);
  const Matrix q = qhat(pe);
  const int draws = 50000;
  Matrix xi(p, draws);
  for (int r = 0; r < draws; ++r) {
    Vector g(n);
    rng_stream(77, static_cast<std::uint64_t>(r)).fill_normal(g);
    xi.col(r) = pe.vhat.transpose() * g / std::sqrt(static_cast<double>(n));
  }
  const Matrix emp = oracle::zero_mean_cov(xi);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b)
      EXPECT_LT(std::abs(emp(a, b) - q(a, b)), 5.0 * oracle::cov_se(q, a, b, draws));
}

TEST(Simulator, DrawsMatchPerDrawStreams) {
  // The blocked simulator must agree with drawing xi one stream at a time.
  const Eigen::Index n = 20, p = 6;
  Matrix v(n, p);
  rng_stream(5, 0).fill_normal(v);
  const int draws = 1000;
  const MaxQuantile q = simulate_max_quantile(v, 0.1, draws, 12);
  std::vector<double> maxima;
  for (int r = 0; r < draws; ++r) {
    Vector g(n);
    rng_stream(12, static_cast<std::uint64_t>(r)).fill_normal(g);
    maxima.push_back((v.transpose() * g).cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(n)));
  }
  std::sort(maxima.begin(), maxima.end());
  for (int r = 0; r < draws; ++r) EXPECT_NEAR(q.sorted_maxima[static_cast<std::size_t>(r)], maxima[static_cast<std::size_t>(r)], 1e-12);
  EXPECT_EQ(q.critical_value, q.sorted_maxima[899]);
}

TEST(Simulator, CriticalValueMonotoneInAlpha) {
  Matrix v(25, 8);
  rng_stream(6, 0).fill_normal(v);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    const double c = simulate_max_quantile(v, alpha, 2000, 9).critical_value;
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(Simulator, ThreadCountDoesNotMatter) {
  Matrix v(25, 40);
  rng_stream(7, 0).fill_normal(v);
  const MaxQuantile a = simulate_max_quantile(v, 0.05, 3000, 5, Vector(), 1);
  const MaxQuantile b = simulate_max_quantile(v, 0.05, 3000, 5, Vector(), 4);
  EXPECT_EQ(a.sorted_maxima, b.sorted_maxima);
}

TEST(Simulator, ArgumentChecks) {
  const Matrix v = Matrix::Ones(5, 2);
  EXPECT_THROW(simulate_max_quantile(v, 0.0, 2000, 1), ArgumentError);
  EXPECT_THROW(simulate_max_quantile(v, 1.0, 2000, 1), ArgumentError);
  EXPECT_THROW(simulate_max_quantile(v, 0.05, 999, 1), ArgumentError);
  EXPECT_THROW(simulate_max_quantile(v, 0.05, 2000, 1, Vector::Ones(4)), DimensionError);
}

TEST(RunTiers, ResultInvariants) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.5 * seed, 60, 50, seed).data;
    TiersConfig cfg;
    cfg.seed = seed;
    const TestResult r = run_tiers(d, 0.05, cfg);
    EXPECT_EQ(r.reject, r.t_n > r.critical_value);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    if (r.reject) EXPECT_LE(r.p_value, 0.05 + 1.0 / cfg.draws);
    else EXPECT_GE(r.p_value, 0.05 - 1.0 / cfg.draws);
    EXPECT_GT(r.sigma_hat_u, 0.0);
    EXPECT_EQ(r.sim_draws, 2000);
    EXPECT_EQ(r.variant, Variant::Tiers);
  }
}

TEST(RunTiers, IndependentOfThreadCount) {
  const TwoSampleData d = gen_regression(Regime::DL, 2.0, 0.3, 60, 50, 21).data;
  TiersConfig a, b;
  a.threads = 1;
  b.threads = 3;
  const TestResult ra = run_tiers(d, 0.05, a), rb = run_tiers(d, 0.05, b);
  EXPECT_EQ(ra.t_n, rb.t_n);
  EXPECT_EQ(ra.critical_value, rb.critical_value);
}

TEST(RunTiers, ResponseScalingLeavesStatistic) {
  const TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.4, 60, 50, 22).data;
  TwoSampleData s = d;
  s.y_a *= 37.5;
  s.y_b *= 37.5;
  const TestResult a = run_tiers(d, 0.05), b = run_tiers(s, 0.05);
  EXPECT_NEAR(a.t_n, b.t_n, 1e-6 * a.t_n);
  EXPECT_EQ(a.critical_value, b.critical_value);
  EXPECT_EQ(a.reject, b.reject);
}

TEST(RunTiers, WeightedQhatRuns) {
  const TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.0, 60, 50, 23).data;
  TiersConfig cfg;
  cfg.weighted_qhat = true;
  const TestResult r = run_tiers(d, 0.05, cfg);
  EXPECT_GT(r.critical_value, 0.0);
  EXPECT_EQ(r.reject, r.t_n > r.critical_value);
}

TEST(RunTiers, ArgumentChecks) {
  const TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.0, 30, 20, 24).data;
  EXPECT_THROW(run_tiers(d, 1.5), ArgumentError);
  TiersConfig cfg;
  cfg.draws = 10;
  EXPECT_THROW(run_tiers(d, 0.05, cfg), ArgumentError);
  cfg = {};
  cfg.eta = -1.0;
  EXPECT_THROW(run_tiers(d, 0.05, cfg), ArgumentError);
}

TEST(RunTiersPlus, HugeMuMatchesTiers) {
  const TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.3, 60, 50, 25).data;
  TiersConfig cfg;
  cfg.mu = 1e12;
  const TestResult a = run_tiers(d, 0.05, cfg), b = run_tiers_plus(d, 0.05, cfg);
  EXPECT_NEAR(a.t_n, b.t_n, 1e-6 * a.t_n);
  EXPECT_EQ(b.variant, Variant::TiersPlus);
  EXPECT_EQ(b.mu, 1e12);
}

TEST(RunTiersPlus, DefaultMu) {
  EXPECT_NEAR(default_mu(200, 300, 1.0), std::pow(200.0, 1.0 / 9.0) * std::cbrt(std::log(300.0)), 1e-12);
  EXPECT_NEAR(default_mu(200, 300, 2.5), 2.5 * default_mu(200, 300, 1.0), 1e-12);
  EXPECT_THROW(default_mu(200, 300, 0.0), ArgumentError);
}

TEST(RunTiersPlus, PairedNullRatesAgree) {
  int rej_plain = 0, rej_plus = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const TwoSampleData d = gen_regression(Regime::SL, 2.0, 0.0, 80, 60, 1000 + r).data;
    TiersConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(r);
    rej_plain += run_tiers(d, 0.05, cfg).reject;
    rej_plus += run_tiers_plus(d, 0.05, cfg).reject;
  }
  EXPECT_LE(std::abs(rej_plain - rej_plus), 3);
}

TEST(RunTiersPlus, RademacherDesignNullSize) {
  const Eigen::Index n = 200, p = 300;
  int rejections = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = rng_stream(5000 + static_cast<std::uint64_t>(r), 0);
    TwoSampleData d{Matrix(n, p), Vector(n), Matrix(n, p), Vector(n)};
    for (Matrix* x : {&d.x_a, &d.x_b})
      for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) (*x)(i, j) = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    Vector beta = Vector::Zero(p);
    beta.head(3).setOnes();
    Vector ua(n), ub(n);
    rng.fill_normal(ua);
    rng.fill_normal(ub);
    d.y_a = d.x_a * beta + ua;
    d.y_b = d.x_b * beta + ub;
    TiersConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(r);
    rejections += run_tiers_plus(d, 0.05, cfg).reject;
  }
  EXPECT_GE(rejections, 1);
  EXPECT_LE(rejections, 10);
}
