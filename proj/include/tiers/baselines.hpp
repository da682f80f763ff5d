#pragma once

#include <cstdint>
#include <vector>

#include "tiers/model.hpp"

namespace tiers {

/// Size of the naive max-|t| two-sample test under a dense null
/// beta_A = beta_B = 1_p c / sqrt(n), with identity designs.
///
/// The de-biased difference is simulated directly through its Gaussian
/// representation zeta = (S_A - S_B) 1_p c + n^{-1/2} (X_A^T g_A - X_B^T g_B),
/// not through a Lasso fit.
struct NaiveDemoConfig {
  long n = 100;
  long p = 300;
  std::vector<double> c_grid{0.0, 0.0005, 0.001, 0.0015, 0.002};
  double alpha = 0.05;
  int outer_reps = 100;   // draws of (S_A, S_B)
  int inner_draws = 4000; // draws of zeta per design, per sample
  std::uint64_t seed = 0;
  int threads = 0;

  void validate() const;
};

struct NaiveSizePoint {
  double c = 0.0;
  double m_hat = 0.0;  // mean over outer reps of the exceedance fraction
  double se = 0.0;     // standard error across outer reps
};

std::vector<NaiveSizePoint> naive_size_curve(const NaiveDemoConfig& cfg);

/// p x draws matrix of zeta draws for fixed designs. Draw k uses
/// rng_stream(seed, k).
Matrix naive_zeta_draws(const Matrix& x_a, const Matrix& x_b, double c, int draws,
                        std::uint64_t seed);

/// One outer replication for fixed designs: exceedance fraction per c of the
/// studentized max |zeta_j| over the critical value estimated from an
/// independent c = 0 sample. Both samples have `inner_draws` draws.
std::vector<double> naive_exceedance(const Matrix& x_a, const Matrix& x_b,
                                     const std::vector<double>& c_grid, double alpha,
                                     int inner_draws, std::uint64_t seed);

/// Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double prob);

/// d_n = sqrt(n) q / sqrt(q^2 / 2 + q sigma^2), q = gamma^T Sigma_B gamma.
double lr_noncentrality(const Vector& gamma, const Matrix& sigma_b, double sigma_u_b, long n);

/// Phi(d_n - Phi^{-1}(1 - alpha)); equals alpha when gamma = 0.
double lr_oracle_power(const Vector& gamma, const Matrix& sigma_b, double sigma_u_b, long n,
                       double alpha);

struct LrMonteCarlo {
  double power = 0.0;
  double se = 0.0;
  double critical_value = 0.0;
};

/// Simulates LR_n = sum_i s_i with
///   s_i = sigma^{-2} y_i x_i'g - sigma^{-2} (x_i'g)(x_i'beta_A) - sigma^{-2} (x_i'g)^2 / 2
/// on Gaussian samples of size n. The critical value is the empirical
/// (1 - alpha) quantile over `null_reps` draws under beta_B = beta_A; power is
/// the exceedance rate over `alt_reps` draws under beta_B = beta_A + gamma.
LrMonteCarlo lr_monte_carlo_power(const Vector& gamma, const Matrix& sigma_b, double sigma_u_b,
                                  const Vector& beta_a, long n, double alpha, int alt_reps,
                                  int null_reps, std::uint64_t seed, int threads = 0);

}  // namespace tiers
