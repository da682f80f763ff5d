#include "tiers/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "tiers/error.hpp"
#include "tiers/parallel.hpp"
#include "tiers/rng.hpp"

namespace tiers {

namespace {

constexpr int kBlock = 256;

long upper_order_index(double alpha, long count) {
  long k = static_cast<long>(std::ceil((1.0 - alpha) * static_cast<double>(count) - 1e-9));
  return std::clamp(k, 1L, count) - 1;
}

void check_designs(const Matrix& x_a, const Matrix& x_b) {
  if (x_a.rows() != x_b.rows()) throw DimensionError("n", "designs have different row counts");
  if (x_a.cols() != x_b.cols()) throw DimensionError("p", "designs have different column counts");
  if (x_a.rows() < 1 || x_a.cols() < 1) throw ArgumentError("designs must be non-empty");
}

/// Fills `out` (p x count) with n^{-1/2} [X_A; -X_B]^T G for draws first..first+count-1.
void noise_block(const Matrix& stacked_t, long first, int count, std::uint64_t seed, Matrix& out) {
  const Eigen::Index rows = stacked_t.cols();
  Matrix g(rows, count);
  for (int k = 0; k < count; ++k) {
    RngStream rng = rng_stream(seed, static_cast<std::uint64_t>(first + k));
    rng.fill_normal(g.col(k));
  }
  out.noalias() = stacked_t * g;
  out *= 1.0 / std::sqrt(static_cast<double>(rows / 2));
}

struct NaiveDesign {
  Matrix stacked_t;  // p x 2n
  Vector mean_unit;  // (S_A - S_B) 1_p
  Vector inv_sd;     // 1 / sqrt(S_A,jj + S_B,jj)
};

NaiveDesign prepare(const Matrix& x_a, const Matrix& x_b) {
  check_designs(x_a, x_b);
  const Eigen::Index n = x_a.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  NaiveDesign d;
  d.stacked_t.resize(x_a.cols(), 2 * n);
  d.stacked_t.leftCols(n) = x_a.transpose();
  d.stacked_t.rightCols(n) = -x_b.transpose();
  const Vector row_a = x_a.rowwise().sum();
  const Vector row_b = x_b.rowwise().sum();
  d.mean_unit = (x_a.transpose() * row_a - x_b.transpose() * row_b) * inv_n;
  d.inv_sd = ((x_a.colwise().squaredNorm() + x_b.colwise().squaredNorm()).transpose() * inv_n)
                 .cwiseSqrt()
                 .cwiseInverse();
  return d;
}

}  // namespace

void NaiveDemoConfig::validate() const {
  if (n < 2) throw ArgumentError("n must be at least 2");
  if (p < 1) throw ArgumentError("p must be at least 1");
  if (c_grid.empty()) throw ArgumentError("c_grid must be nonempty");
  for (double c : c_grid)
    if (!std::isfinite(c)) throw ArgumentError("c_grid entries must be finite");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (outer_reps < 50) throw ArgumentError("outer_reps must be at least 50");
  if (inner_draws < 2000) throw ArgumentError("inner_draws must be at least 2000");
}

Matrix naive_zeta_draws(const Matrix& x_a, const Matrix& x_b, double c, int draws,
                        std::uint64_t seed) {
  if (draws < 1) throw ArgumentError("draws must be positive");
  const NaiveDesign d = prepare(x_a, x_b);
  Matrix out(x_a.cols(), draws);
  Matrix block;
  for (long first = 0; first < draws; first += kBlock) {
    const int count = static_cast<int>(std::min<long>(kBlock, draws - first));
    noise_block(d.stacked_t, first, count, seed, block);
    out.middleCols(first, count) = block.colwise() + c * d.mean_unit;
  }
  return out;
}

std::vector<double> naive_exceedance(const Matrix& x_a, const Matrix& x_b,
                                     const std::vector<double>& c_grid, double alpha,
                                     int inner_draws, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (inner_draws < 1) throw ArgumentError("inner_draws must be positive");
  const NaiveDesign d = prepare(x_a, x_b);
  const std::uint64_t null_seed = derive_seed(seed, {0});
  const std::uint64_t test_seed = derive_seed(seed, {1});

  std::vector<double> null_max(static_cast<std::size_t>(inner_draws));
  Matrix block;
  for (long first = 0; first < inner_draws; first += kBlock) {
    const int count = static_cast<int>(std::min<long>(kBlock, inner_draws - first));
    noise_block(d.stacked_t, first, count, null_seed, block);
    for (int k = 0; k < count; ++k)
      null_max[static_cast<std::size_t>(first + k)] =
          (block.col(k).cwiseAbs().cwiseProduct(d.inv_sd)).maxCoeff();
  }
  std::sort(null_max.begin(), null_max.end());
  const double crit = null_max[static_cast<std::size_t>(upper_order_index(alpha, inner_draws))];

  std::vector<long> hits(c_grid.size(), 0);
  for (long first = 0; first < inner_draws; first += kBlock) {
    const int count = static_cast<int>(std::min<long>(kBlock, inner_draws - first));
    noise_block(d.stacked_t, first, count, test_seed, block);
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
      const Vector shift = c_grid[ci] * d.mean_unit;
      for (int k = 0; k < count; ++k) {
        const double m = ((block.col(k) + shift).cwiseAbs().cwiseProduct(d.inv_sd)).maxCoeff();
        if (m > crit) ++hits[ci];
      }
    }
  }
  std::vector<double> out(c_grid.size());
  for (std::size_t ci = 0; ci < c_grid.size(); ++ci)
    out[ci] = static_cast<double>(hits[ci]) / inner_draws;
  return out;
}

std::vector<NaiveSizePoint> naive_size_curve(const NaiveDemoConfig& cfg) {
  cfg.validate();
  const std::size_t nc = cfg.c_grid.size();
  std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(cfg.outer_reps));
  parallel_for(cfg.outer_reps, resolve_threads(cfg.threads), [&](long r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)});
    Matrix x_a(cfg.n, cfg.p), x_b(cfg.n, cfg.p);
    rng_stream(rep_seed, 0).fill_normal(x_a);
    rng_stream(rep_seed, 1).fill_normal(x_b);
    per_rep[static_cast<std::size_t>(r)] =
        naive_exceedance(x_a, x_b, cfg.c_grid, cfg.alpha, cfg.inner_draws, derive_seed(rep_seed, {2}));
  });

  std::vector<NaiveSizePoint> out(nc);
  const double reps = cfg.outer_reps;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    double sum = 0.0;
    for (const auto& row : per_rep) sum += row[ci];
    const double mean = sum / reps;
    double ss = 0.0;
    for (const auto& row : per_rep) ss += (row[ci] - mean) * (row[ci] - mean);
    out[ci] = {cfg.c_grid[ci], mean, std::sqrt(ss / (reps - 1.0) / reps)};
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw ArgumentError("probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double lr_noncentrality(const Vector& gamma, const Matrix& sigma_b, double sigma_u_b, long n) {
  if (sigma_b.rows() != gamma.size() || sigma_b.cols() != gamma.size())
    throw DimensionError("p", "gamma and Sigma_B disagree in dimension");
  if (!(sigma_u_b > 0.0)) throw ArgumentError("sigma_u_b must be positive");
  if (n < 1) throw ArgumentError("n must be positive");
  const double q = gamma.dot(sigma_b * gamma);
  if (q == 0.0) return 0.0;
  if (!(q > 0.0)) throw ArgumentError("gamma^T Sigma_B gamma must be nonnegative");
  return std::sqrt(static_cast<double>(n)) * q / std::sqrt(q * q / 2.0 + q * sigma_u_b * sigma_u_b);
}

double lr_oracle_power(const Vector& gamma, const Matrix& sigma_b, double sigma_u_b, long n,
                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (gamma.size() > 0 && gamma.cwiseAbs().maxCoeff() == 0.0) {
    lr_noncentrality(gamma, sigma_b, sigma_u_b, n);  // argument checks only
    return alpha;
  }
  const double d = lr_noncentrality(gamma, sigma_b, sigma_u_b, n);
  return normal_cdf(d - normal_quantile(1.0 - alpha));
}

LrMonteCarlo lr_monte_carlo_power(const Vector& gamma, const Matrix& sigma_b, double sigma_u_b,
                                  const Vector& beta_a, long n, double alpha, int alt_reps,
                                  int null_reps, std::uint64_t seed, int threads) {
  const Eigen::Index p = gamma.size();
  if (beta_a.size() != p) throw DimensionError("p", "beta_A and gamma disagree in dimension");
  lr_noncentrality(gamma, sigma_b, sigma_u_b, n);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (alt_reps < 1 || null_reps < 1) throw ArgumentError("replication counts must be positive");
  Eigen::LLT<Matrix> llt(sigma_b);
  if (llt.info() != Eigen::Success) throw FactorizationError("Sigma_B is not positive definite");
  const Matrix lt = llt.matrixL().transpose();
  const double inv_var = 1.0 / (sigma_u_b * sigma_u_b);

  auto draw_lr = [&](bool alternative, long rep) {
    RngStream rng = rng_stream(derive_seed(seed, {alternative ? 1u : 0u}), static_cast<std::uint64_t>(rep));
    Matrix g(n, p);
    rng.fill_normal(g);
    const Matrix x = g * lt;
    Vector u(n);
    rng.fill_normal(u);
    const Vector xg = x * gamma;
    const Vector xb = x * beta_a;
    const Vector y = xb + (alternative ? xg : Vector::Zero(n)) + sigma_u_b * u;
    return inv_var * (y.cwiseProduct(xg).sum() - xg.cwiseProduct(xb).sum() - 0.5 * xg.squaredNorm());
  };

  const int nt = resolve_threads(threads);
  std::vector<double> null_lr(static_cast<std::size_t>(null_reps));
  parallel_for(null_reps, nt, [&](long r) { null_lr[static_cast<std::size_t>(r)] = draw_lr(false, r); });
  std::sort(null_lr.begin(), null_lr.end());

  LrMonteCarlo out;
  out.critical_value = null_lr[static_cast<std::size_t>(upper_order_index(alpha, null_reps))];
  std::vector<char> hit(static_cast<std::size_t>(alt_reps));
  parallel_for(alt_reps, nt, [&](long r) {
    hit[static_cast<std::size_t>(r)] = draw_lr(true, r) > out.critical_value;
  });
  out.power = static_cast<double>(std::count(hit.begin(), hit.end(), char{1})) / alt_reps;
  out.se = std::sqrt(out.power * (1.0 - out.power) / alt_reps);
  return out;
}

}  // namespace tiers
