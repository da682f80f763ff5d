#pragma once

#include <memory>

#include "tiers/model.hpp"

namespace tiers {

namespace detail {
class L1BoxDualSimplex;
}

/// Optional constraint set added to the Dantzig program. `None` leaves b free;
/// `ResidualSupNorm` adds ||H - G b||_inf <= mu * sigma.
struct SideConstraint {
  enum class Kind { None, ResidualSupNorm };
  Kind kind = Kind::None;
  double mu = 0.0;

  static SideConstraint none() { return {}; }
  static SideConstraint residual_sup_norm(double mu) { return {Kind::ResidualSupNorm, mu}; }
  bool active() const { return kind != Kind::None; }
};

/// min ||b||_1  s.t.  ||n^{-1} G^T (H - G b)||_inf <= eta * sigma  [and the side constraint].
struct DantzigProblem {
  Matrix g;
  Vector h;
  double eta = 0.0;
  SideConstraint side;

  Eigen::Index n() const { return g.rows(); }
  Eigen::Index p() const { return g.cols(); }
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible };

struct DantzigSolution {
  Vector b;
  double objective = 0.0;
  LpStatus status = LpStatus::Infeasible;
  /// eta * sigma - ||n^{-1} G^T (H - G b)||_inf
  double constraint_slack = 0.0;
  /// Multipliers of the stacked rows [n^{-1} G^T G ; G]; used by certify_optimality.
  Vector duals;
  long iterations = 0;
};

/// Feasibility tolerance used for every Dantzig-family check.
inline double feasibility_tolerance(double eta_sigma) {
  return 1e-7 * (eta_sigma > 1.0 ? eta_sigma : 1.0);
}

/// Solves one Dantzig problem at a sequence of scales. Each call to `solve`
/// warm-starts from the previous optimal basis; the sequence of solutions is
/// a deterministic function of the sequence of sigmas.
///
/// Internally the response is divided by ||H||_2 / sqrt(n) so the simplex
/// tolerances act on unit-scale data; solutions are mapped back.
class DantzigSolver {
 public:
  explicit DantzigSolver(DantzigProblem problem);
  ~DantzigSolver();
  DantzigSolver(DantzigSolver&&) noexcept;
  DantzigSolver& operator=(DantzigSolver&&) noexcept;

  DantzigSolution solve(double sigma);
  const DantzigProblem& problem() const { return problem_; }
  long total_iterations() const;

 private:
  DantzigProblem problem_;
  double scale_ = 1.0;
  Vector corr_;  // n^{-1} G^T H / scale
  Vector h_scaled_;
  std::unique_ptr<detail::L1BoxDualSimplex> engine_;
};

DantzigSolution solve_at_sigma(const DantzigProblem& prob, double sigma);

/// Independent check of a returned solution: primal feasibility within
/// feasibility_tolerance, ||K^T y||_inf <= 1 + 1e-7 and zero duality gap
/// (relative 1e-7) for the stored multipliers. Returns false on any violation.
bool certify_optimality(const DantzigProblem& prob, double sigma, const DantzigSolution& sol);

}  // namespace tiers
