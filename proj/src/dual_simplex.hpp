#pragma once

#include <vector>

#include <Eigen/Dense>

namespace tiers::detail {

/// Dense bounded dual simplex for the l1 box program
///
///     minimize ||b||_1   subject to   lo <= K b <= hi
///
/// with b split as b+ - b-, b+, b- >= 0, and one boxed logical r_i = (K b)_i
/// per row. The all-logical basis is dual feasible for any bounds, and changing
/// lo/hi never touches the reduced costs, so a solved basis stays a valid warm
/// start when the bounds move. The basis inverse is kept explicitly and rebuilt
/// by LU every `kRefactorInterval` pivots.
class L1BoxDualSimplex {
 public:
  enum class Status { Optimal, Infeasible };

  explicit L1BoxDualSimplex(Eigen::MatrixXd k);

  /// Requires lo <= hi entrywise (equal bounds allowed).
  Status solve(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  /// b = b+ - b- at the current basis.
  Eigen::VectorXd primal() const;
  /// Row multipliers y; at optimality ||K^T y||_inf <= 1 and
  /// sum_i min(y_i lo_i, y_i hi_i) equals the optimal objective.
  Eigen::VectorXd row_duals() const;

  long last_iterations() const { return last_iterations_; }
  long total_iterations() const { return total_iterations_; }
  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return p_; }

 private:
  enum class VarState : unsigned char { Basic, Lower, Upper };

  static constexpr int kRefactorInterval = 100;
  static constexpr int kStallThreshold = 50;
  static constexpr double kPrimalTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;

  bool is_structural(Eigen::Index j) const { return j < 2 * p_; }
  double cost(Eigen::Index j) const { return is_structural(j) ? 1.0 : 0.0; }
  double lower(Eigen::Index j) const;
  double upper(Eigen::Index j) const;
  double nonbasic_value(Eigen::Index j) const;
  void column(Eigen::Index j, Eigen::VectorXd& out) const;

  void refactor();
  void compute_primal();
  void compute_duals();
  void align_logical_bounds();

  Eigen::MatrixXd k_;
  Eigen::Index m_;
  Eigen::Index p_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;

  std::vector<Eigen::Index> basis_;  // variable index per basis row
  std::vector<VarState> state_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd d_;  // reduced costs, all variables
  int updates_since_refactor_ = 0;
  long last_iterations_ = 0;
  long total_iterations_ = 0;
};

}  // namespace tiers::detail
