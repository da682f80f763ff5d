#include "tiers/model.hpp"

#include <string>

#include "tiers/error.hpp"

namespace tiers {

namespace {

void require_spd(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionError(name, std::string(name) + " must be square");
  }
  if (!m.allFinite()) {
    throw FactorizationError(std::string(name) + " has non-finite entries");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw FactorizationError(std::string(name) + " is not symmetric");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError(std::string(name) + " is not positive definite");
  }
}

void require_pair(const Matrix& sigma_a, const Matrix& sigma_b) {
  require_spd(sigma_a, "sigma_a");
  require_spd(sigma_b, "sigma_b");
  if (sigma_a.rows() != sigma_b.rows()) {
    throw DimensionError("p", "sigma_a and sigma_b differ in dimension");
  }
}

}  // namespace

void TwoSampleData::validate() const {
  if (x_b.rows() != x_a.rows()) {
    throw DimensionError("n", "x_a has " + std::to_string(x_a.rows()) + " rows but x_b has " +
                                  std::to_string(x_b.rows()) +
                                  " (unequal sample sizes are not supported)");
  }
  if (x_b.cols() != x_a.cols()) {
    throw DimensionError("p", "x_a has " + std::to_string(x_a.cols()) + " columns but x_b has " +
                                  std::to_string(x_b.cols()));
  }
  if (y_a.size() != x_a.rows()) {
    throw DimensionError("n", "y_a has length " + std::to_string(y_a.size()) + ", expected " +
                                  std::to_string(x_a.rows()));
  }
  if (y_b.size() != x_b.rows()) {
    throw DimensionError("n", "y_b has length " + std::to_string(y_b.size()) + ", expected " +
                                  std::to_string(x_b.rows()));
  }
  if (x_a.rows() < 2) throw ArgumentError("need at least two observations per sample");
  if (x_a.cols() < 1) throw ArgumentError("need at least one feature");
  if (!x_a.allFinite() || !x_b.allFinite() || !y_a.allFinite() || !y_b.allFinite()) {
    throw ArgumentError("two-sample data contains non-finite entries");
  }
}

ConvolvedData convolve(const TwoSampleData& data) {
  data.validate();
  return ConvolvedData{data.x_a + data.x_b, data.x_a - data.x_b, data.y_a + data.y_b};
}

Matrix population_pi(const Matrix& sigma_a, const Matrix& sigma_b) {
  require_pair(sigma_a, sigma_b);
  const Matrix sum = sigma_a + sigma_b;
  Eigen::LLT<Matrix> llt(sum);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("sigma_a + sigma_b is not positive definite");
  }
  return llt.solve(sigma_a - sigma_b);
}

Matrix population_sigma_v(const Matrix& sigma_a, const Matrix& sigma_b) {
  require_pair(sigma_a, sigma_b);
  // (A^{-1} + B^{-1})^{-1} = A (A + B)^{-1} B
  Eigen::LLT<Matrix> llt(sigma_a + sigma_b);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("sigma_a + sigma_b is not positive definite");
  }
  Matrix v = 4.0 * sigma_a * llt.solve(sigma_b);
  return 0.5 * (v + v.transpose());
}

}  // namespace tiers
