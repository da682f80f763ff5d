#pragma once

#include <Eigen/Dense>

namespace tiers {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Paired observations from the two linear models. Rows are observations.
struct TwoSampleData {
  Matrix x_a;
  Vector y_a;
  Matrix x_b;
  Vector y_b;

  Eigen::Index n() const { return x_a.rows(); }
  Eigen::Index p() const { return x_a.cols(); }

  /// Throws DimensionError naming the mismatched axis, or ArgumentError for
  /// non-finite entries / n < 2.
  void validate() const;
};

/// W = X_A + X_B, Z = X_A - X_B, Y = Y_A + Y_B.
struct ConvolvedData {
  Matrix w;
  Matrix z;
  Vector y;

  Eigen::Index n() const { return w.rows(); }
  Eigen::Index p() const { return w.cols(); }
};

enum class NoiseKind { Gaussian, Cauchy };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double scale = 1.0;
};

/// Population-level description of the two models.
struct PopulationSpec {
  Matrix sigma_a;
  Matrix sigma_b;
  Vector beta_a;
  Vector beta_b;
  NoiseSpec noise_a;
  NoiseSpec noise_b;
};

ConvolvedData convolve(const TwoSampleData& data);

/// Pi_* = (Sigma_A + Sigma_B)^{-1} (Sigma_A - Sigma_B), by Cholesky solve.
Matrix population_pi(const Matrix& sigma_a, const Matrix& sigma_b);

/// Sigma_V = 4 (Sigma_A^{-1} + Sigma_B^{-1})^{-1}.
Matrix population_sigma_v(const Matrix& sigma_a, const Matrix& sigma_b);

}  // namespace tiers
