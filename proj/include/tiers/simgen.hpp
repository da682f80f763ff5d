#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tiers/model.hpp"
#include "tiers/rng.hpp"

namespace tiers {

/// Differential-regression designs: Sparse/Dense coefficients crossed with
/// Light (Gaussian) / Heavy (Cauchy) tailed noise.
enum class Regime { SL, SH, DL, DH };

/// Differential-network designs: sparse/dense beta crossed with sparse/dense
/// precision block Omega.
enum class GgmRegime { SparseBetaSparseOmega, DenseBetaSparseOmega, SparseBetaDenseOmega,
                       DenseBetaDenseOmega };

std::string to_string(Regime r);
std::string to_string(GgmRegime r);
std::optional<Regime> parse_regime(std::string_view s);
std::optional<GgmRegime> parse_ggm_regime(std::string_view s);

/// Ground truth retained next to a generated dataset.
struct SyntheticTruth {
  PopulationSpec spec;
  Vector beta_a;
  Vector beta_b;
  Vector realized_noise_a;
  Vector realized_noise_b;
  Vector theta_star;  // (beta_a + beta_b) / 2
  Vector gamma_star;  // (beta_a - beta_b) / 2
  /// ||u_a + u_b||_2 / sqrt(n)
  double sigma_star_proxy = 0.0;
};

struct SyntheticDataset {
  TwoSampleData data;
  SyntheticTruth truth;
};

/// (Sigma)_{ij} = rho^{|i-j|}
Matrix toeplitz(Eigen::Index p, double rho);

/// Rows of X_A ~ N(0, Sigma_A) with Sigma_A Toeplitz(0.4), X_B ~ N(0, c Sigma_A),
/// beta_B = beta_A + h e_1.
SyntheticDataset gen_regression(Regime regime, double c, double h, Eigen::Index n, Eigen::Index p,
                                std::uint64_t seed);

/// Block sizes (p1, p2, p3) of the banded precision blocks for a graph on p
/// nodes (so p1 + p2 + p3 = p - 1). Throws ArgumentError when p is too small.
struct GgmBlocks {
  Eigen::Index p1, p2, p3;
};
GgmBlocks ggm_blocks(Eigen::Index p);

/// The (p-1) x (p-1) block-diagonal banded matrix D with block scales (1, 2, 4).
Matrix ggm_block_matrix(Eigen::Index p);

/// Node-1 regression of a Gaussian graphical model on p nodes. The returned
/// data has p - 1 features; predictors are N(0, Omega^{-1}) and the node noise
/// is N(0, 0.5^2).
SyntheticDataset gen_ggm(GgmRegime regime, double h, Eigen::Index n, Eigen::Index p,
                         std::uint64_t seed);

}  // namespace tiers
