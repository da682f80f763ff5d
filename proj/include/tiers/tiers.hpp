#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tiers/adds.hpp"
#include "tiers/model.hpp"

namespace tiers {

/// Column-wise ADDS regression of Z on W.
struct PiEstimate {
  Matrix pi;               // p x p, column j regresses Z_j on W
  Vector sigma_tilde_cols; // per-column selected scale
  Matrix vhat;             // Z - W pi
  std::vector<char> degenerate;  // Z_j identically zero

  long degenerate_count() const;
};

enum class Variant { Tiers, TiersPlus };

const char* to_string(Variant v);

struct TiersConfig {
  int draws = 2000;
  std::uint64_t seed = 0;
  /// Replaces the adaptive eta when set.
  std::optional<double> eta;
  /// Multiplies each simulated row by u_i / sigma_u (the residual-weighted
  /// covariance) instead of using n^{-1} V^T V as is.
  bool weighted_qhat = false;
  /// TIERS+ residual bound: mu = mu_scale * n^{1/9} * (log p)^{1/3} unless `mu` is set.
  double mu_scale = 1.0;
  std::optional<double> mu;
  /// 0 = TIERS_THREADS or hardware concurrency.
  int threads = 0;
};

struct TestResult {
  double t_n = 0.0;
  double critical_value = 0.0;
  double alpha = 0.05;
  double p_value = 1.0;
  bool reject = false;
  double sigma_hat_u = 0.0;
  Variant variant = Variant::Tiers;
  int sim_draws = 0;
  std::uint64_t seed = 0;

  // diagnostics
  double eta = 0.0;
  double mu = 0.0;  // 0 for plain TIERS
  double sigma_tilde_u = 0.0;
  long degenerate_columns = 0;
  long lp_solves = 0;
};

/// Empirical law of ||xi||_inf, xi = n^{-1/2} V^T (w o g), g ~ N(0, I_n).
struct MaxQuantile {
  double critical_value = 0.0;
  std::vector<double> sorted_maxima;

  /// Fraction of simulated maxima >= t.
  double tail_fraction(double t) const;
};

PiEstimate estimate_pi(const ConvolvedData& conv, double eta, int threads = 1);
AddsFit estimate_theta(const ConvolvedData& conv, double eta);
AddsFit estimate_theta_plus(const ConvolvedData& conv, double eta, double mu);

/// n^{-1} V^T V. Materializes a p x p matrix; meant for tests and small p.
Matrix qhat(const PiEstimate& pi_est);

/// n^{-1/2} sigma_u^{-1} ||V^T (Y - W theta)||_inf with sigma_u = ||Y - W theta|| / sqrt(n).
double test_statistic(const ConvolvedData& conv, const PiEstimate& pi_est, const AddsFit& theta_fit);

/// Order statistic ceil((1 - alpha) R) of R simulated maxima. Draw r uses
/// rng_stream(seed, r), so the result does not depend on `threads`.
/// `row_weights` (length n) rescales row i of V before simulating; empty = ones.
MaxQuantile simulate_max_quantile(const Matrix& vhat, double alpha, int draws, std::uint64_t seed,
                                  const Vector& row_weights = Vector(), int threads = 1);

double default_mu(Eigen::Index n, Eigen::Index p, double mu_scale);

TestResult run_tiers(const TwoSampleData& data, double alpha, const TiersConfig& config = {});
TestResult run_tiers_plus(const TwoSampleData& data, double alpha, const TiersConfig& config = {});

}  // namespace tiers
