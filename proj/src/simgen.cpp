#include "tiers/simgen.hpp"

#include <cmath>

#include "tiers/error.hpp"

namespace tiers {

namespace {

enum Stream : std::uint64_t { kBeta = 0, kDesignA = 1, kDesignB = 2, kNoiseA = 3, kNoiseB = 4 };

constexpr double kToeplitzRho = 0.4;
constexpr double kGgmNoiseSd = 0.5;

Vector dense_beta(Eigen::Index p, RngStream& rng) {
  Vector zeta(p);
  for (Eigen::Index j = 0; j < p; ++j) zeta[j] = rng.uniform();
  return zeta / zeta.norm();
}

Vector sparse_beta(Eigen::Index p, double value) {
  Vector b = Vector::Zero(p);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(3, p); ++j) b[j] = value;
  return b;
}

Vector draw_noise(Eigen::Index n, NoiseSpec spec, RngStream rng) {
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u[i] = spec.scale * (spec.kind == NoiseKind::Cauchy ? rng.cauchy() : rng.normal());
  }
  return u;
}

/// n draws whose transposes are L g, g ~ N(0, I); i.e. rows ~ N(0, L L^T).
Matrix rows_from_factor(const Matrix& lower, Eigen::Index n, RngStream rng) {
  Matrix g(lower.rows(), n);
  rng.fill_normal(g);
  return (lower.triangularView<Eigen::Lower>() * g).transpose();
}

void fill_truth(SyntheticDataset& ds) {
  auto& t = ds.truth;
  t.theta_star = (t.beta_a + t.beta_b) / 2.0;
  t.gamma_star = (t.beta_a - t.beta_b) / 2.0;
  t.sigma_star_proxy = (t.realized_noise_a + t.realized_noise_b).norm() /
                       std::sqrt(static_cast<double>(ds.data.n()));
  t.spec.beta_a = t.beta_a;
  t.spec.beta_b = t.beta_b;
}

void check_sizes(Eigen::Index n, Eigen::Index p) {
  if (n < 2) throw ArgumentError("n must be at least 2");
  if (p < 1) throw ArgumentError("p must be at least 1");
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::SL: return "SL";
    case Regime::SH: return "SH";
    case Regime::DL: return "DL";
    case Regime::DH: return "DH";
  }
  return "?";
}

std::string to_string(GgmRegime r) {
  switch (r) {
    case GgmRegime::SparseBetaSparseOmega: return "SbSO";
    case GgmRegime::DenseBetaSparseOmega: return "DbSO";
    case GgmRegime::SparseBetaDenseOmega: return "SbDO";
    case GgmRegime::DenseBetaDenseOmega: return "DbDO";
  }
  return "?";
}

std::optional<Regime> parse_regime(std::string_view s) {
  if (s == "SL") return Regime::SL;
  if (s == "SH") return Regime::SH;
  if (s == "DL") return Regime::DL;
  if (s == "DH") return Regime::DH;
  return std::nullopt;
}

std::optional<GgmRegime> parse_ggm_regime(std::string_view s) {
  if (s == "SbSO") return GgmRegime::SparseBetaSparseOmega;
  if (s == "DbSO") return GgmRegime::DenseBetaSparseOmega;
  if (s == "SbDO") return GgmRegime::SparseBetaDenseOmega;
  if (s == "DbDO") return GgmRegime::DenseBetaDenseOmega;
  return std::nullopt;
}

Matrix toeplitz(Eigen::Index p, double rho) {
  Matrix t(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) t(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return t;
}

SyntheticDataset gen_regression(Regime regime, double c, double h, Eigen::Index n, Eigen::Index p,
                                std::uint64_t seed) {
  check_sizes(n, p);
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("covariance ratio c must be positive");
  if (!std::isfinite(h)) throw ArgumentError("deviation h must be finite");

  const bool dense = regime == Regime::DL || regime == Regime::DH;
  const bool heavy = regime == Regime::SH || regime == Regime::DH;

  SyntheticDataset ds;
  auto& t = ds.truth;
  t.spec.sigma_a = toeplitz(p, kToeplitzRho);
  t.spec.sigma_b = c * t.spec.sigma_a;
  t.spec.noise_a = t.spec.noise_b = NoiseSpec{heavy ? NoiseKind::Cauchy : NoiseKind::Gaussian, 1.0};

  RngStream beta_rng = rng_stream(seed, kBeta);
  t.beta_a = dense ? dense_beta(p, beta_rng) : sparse_beta(p, 1.0);
  t.beta_b = t.beta_a;
  t.beta_b[0] += h;

  Eigen::LLT<Matrix> llt(t.spec.sigma_a);
  const Matrix lower = llt.matrixL();
  ds.data.x_a = rows_from_factor(lower, n, rng_stream(seed, kDesignA));
  ds.data.x_b = std::sqrt(c) * rows_from_factor(lower, n, rng_stream(seed, kDesignB));
  t.realized_noise_a = draw_noise(n, t.spec.noise_a, rng_stream(seed, kNoiseA));
  t.realized_noise_b = draw_noise(n, t.spec.noise_b, rng_stream(seed, kNoiseB));
  ds.data.y_a = ds.data.x_a * t.beta_a + t.realized_noise_a;
  ds.data.y_b = ds.data.x_b * t.beta_b + t.realized_noise_b;
  fill_truth(ds);
  return ds;
}

GgmBlocks ggm_blocks(Eigen::Index p) {
  if (p < 8) {
    throw ArgumentError("GGM graph needs p >= 8 nodes (p - 1 = p1 + p2 + p3 with p1 = ceil(p/2 - 1)"
                        " and the rest split in half); got p = " + std::to_string(p));
  }
  const Eigen::Index p1 = (p + 1) / 2 - 1;  // ceil(p/2 - 1)
  const Eigen::Index rest = p - 1 - p1;
  const Eigen::Index p2 = rest / 2;
  return {p1, p2, rest - p2};
}

Matrix ggm_block_matrix(Eigen::Index p) {
  const GgmBlocks blocks = ggm_blocks(p);
  const Eigen::Index q = p - 1;
  Matrix d = Matrix::Zero(q, q);
  const Eigen::Index sizes[3] = {blocks.p1, blocks.p2, blocks.p3};
  const double scales[3] = {1.0, 2.0, 4.0};
  Eigen::Index off = 0;
  for (int k = 0; k < 3; ++k) {
    for (Eigen::Index j = 0; j < sizes[k]; ++j) {
      const Eigen::Index r = off + j;
      d(r, r) = scales[k];
      if (j >= 1) d(r, r - 1) = d(r - 1, r) = 0.5 * scales[k];
      if (j >= 2) d(r, r - 2) = d(r - 2, r) = 0.4 * scales[k];
    }
    off += sizes[k];
  }
  return d;
}

SyntheticDataset gen_ggm(GgmRegime regime, double h, Eigen::Index n, Eigen::Index p,
                         std::uint64_t seed) {
  if (n < 2) throw ArgumentError("n must be at least 2");
  if (!std::isfinite(h)) throw ArgumentError("deviation h must be finite");
  const Matrix d = ggm_block_matrix(p);
  const Eigen::Index q = d.rows();

  const bool dense_beta_regime = regime == GgmRegime::DenseBetaSparseOmega ||
                                 regime == GgmRegime::DenseBetaDenseOmega;
  const bool sparse_omega = regime == GgmRegime::SparseBetaSparseOmega ||
                            regime == GgmRegime::DenseBetaSparseOmega;

  Eigen::LLT<Matrix> llt(d);
  if (llt.info() != Eigen::Success) throw FactorizationError("block matrix D is not positive definite");
  const Matrix l = llt.matrixL();

  SyntheticDataset ds;
  auto& t = ds.truth;
  RngStream beta_rng = rng_stream(seed, kBeta);
  t.beta_a = dense_beta_regime ? dense_beta(q, beta_rng) : sparse_beta(q, 1.0 / std::sqrt(3.0));
  t.beta_b = t.beta_a;
  t.beta_b[0] += h;

  // Predictor covariance is Omega^{-1}: D^{-1} when Omega = D, D when Omega = D^{-1}.
  auto draw = [&](Stream s) {
    RngStream rng = rng_stream(seed, s);
    Matrix g(q, n);
    rng.fill_normal(g);
    if (sparse_omega) {
      l.transpose().triangularView<Eigen::Upper>().solveInPlace(g);  // L^{-T} g
    } else {
      g = l.triangularView<Eigen::Lower>() * g;
    }
    return Matrix(g.transpose());
  };
  ds.data.x_a = draw(kDesignA);
  ds.data.x_b = draw(kDesignB);

  t.spec.sigma_a = sparse_omega ? Matrix(llt.solve(Matrix::Identity(q, q))) : d;
  t.spec.sigma_b = t.spec.sigma_a;
  t.spec.noise_a = t.spec.noise_b = NoiseSpec{NoiseKind::Gaussian, kGgmNoiseSd};
  t.realized_noise_a = draw_noise(n, t.spec.noise_a, rng_stream(seed, kNoiseA));
  t.realized_noise_b = draw_noise(n, t.spec.noise_b, rng_stream(seed, kNoiseB));
  ds.data.y_a = ds.data.x_a * t.beta_a + t.realized_noise_a;
  ds.data.y_b = ds.data.x_b * t.beta_b + t.realized_noise_b;
  fill_truth(ds);
  return ds;
}

}  // namespace tiers
