#include "tiers/dantzig.hpp"

#include <cmath>

#include "dual_simplex.hpp"
#include "tiers/error.hpp"

namespace tiers {

namespace {

Matrix stacked_rows(const DantzigProblem& prob) {
  const double inv_n = 1.0 / static_cast<double>(prob.n());
  const Eigen::Index extra = prob.side.active() ? prob.n() : 0;
  Matrix k(prob.p() + extra, prob.p());
  k.topRows(prob.p()).noalias() = inv_n * prob.g.transpose() * prob.g;
  if (extra > 0) k.bottomRows(extra) = prob.g;
  return k;
}

}  // namespace

void DantzigProblem::validate() const {
  if (h.size() != g.rows()) {
    throw DimensionError("n", "response length " + std::to_string(h.size()) +
                                  " does not match design rows " + std::to_string(g.rows()));
  }
  if (g.rows() < 1 || g.cols() < 1) throw DimensionError("p", "empty design");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ArgumentError("eta must be positive and finite");
  if (side.active() && (!(side.mu > 0.0) || !std::isfinite(side.mu))) {
    throw ArgumentError("mu must be positive and finite");
  }
  if (!g.allFinite() || !h.allFinite()) throw ArgumentError("Dantzig problem has non-finite data");
}

DantzigSolver::DantzigSolver(DantzigProblem problem) : problem_(std::move(problem)) {
  problem_.validate();
  const double n = static_cast<double>(problem_.n());
  scale_ = problem_.h.norm() / std::sqrt(n);
  if (!(scale_ > 0.0)) scale_ = 1.0;
  h_scaled_ = problem_.h / scale_;
  corr_ = problem_.g.transpose() * h_scaled_ / n;
  engine_ = std::make_unique<detail::L1BoxDualSimplex>(stacked_rows(problem_));
}

DantzigSolver::~DantzigSolver() = default;
DantzigSolver::DantzigSolver(DantzigSolver&&) noexcept = default;
DantzigSolver& DantzigSolver::operator=(DantzigSolver&&) noexcept = default;

long DantzigSolver::total_iterations() const { return engine_->total_iterations(); }

DantzigSolution DantzigSolver::solve(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("sigma must be finite and non-negative");
  }
  const Eigen::Index p = problem_.p();
  const Eigen::Index m = engine_->rows();
  Vector lo(m), hi(m);
  const double band = problem_.eta * sigma / scale_;
  lo.head(p) = corr_.array() - band;
  hi.head(p) = corr_.array() + band;
  if (problem_.side.active()) {
    const double side_band = problem_.side.mu * sigma / scale_;
    lo.tail(problem_.n()) = h_scaled_.array() - side_band;
    hi.tail(problem_.n()) = h_scaled_.array() + side_band;
  }

  const auto status = engine_->solve(lo, hi);

  DantzigSolution sol;
  sol.iterations = engine_->last_iterations();
  sol.status = status == detail::L1BoxDualSimplex::Status::Optimal ? LpStatus::Optimal
                                                                   : LpStatus::Infeasible;
  sol.b = engine_->primal() * scale_;
  sol.objective = sol.b.lpNorm<1>();
  sol.duals = engine_->row_duals();
  const Vector resid = problem_.h - problem_.g * sol.b;
  const double corr_max =
      (problem_.g.transpose() * resid).cwiseAbs().maxCoeff() / static_cast<double>(problem_.n());
  sol.constraint_slack = problem_.eta * sigma - corr_max;
  return sol;
}

DantzigSolution solve_at_sigma(const DantzigProblem& prob, double sigma) {
  DantzigSolver solver(prob);
  return solver.solve(sigma);
}

bool certify_optimality(const DantzigProblem& prob, double sigma, const DantzigSolution& sol) {
  if (sol.status != LpStatus::Optimal) return false;
  if (sol.b.size() != prob.p()) return false;
  const Matrix k = stacked_rows(prob);
  if (sol.duals.size() != k.rows()) return false;
  const double n = static_cast<double>(prob.n());
  const Eigen::Index p = prob.p();

  const Vector resid = prob.h - prob.g * sol.b;
  const Vector corr = prob.g.transpose() * resid / n;
  const double eta_sigma = prob.eta * sigma;
  if (corr.cwiseAbs().maxCoeff() > eta_sigma + feasibility_tolerance(eta_sigma)) return false;

  Vector lo(k.rows()), hi(k.rows());
  const Vector c = prob.g.transpose() * prob.h / n;
  lo.head(p) = c.array() - eta_sigma;
  hi.head(p) = c.array() + eta_sigma;
  if (prob.side.active()) {
    const double mu_sigma = prob.side.mu * sigma;
    if (resid.cwiseAbs().maxCoeff() > mu_sigma + feasibility_tolerance(mu_sigma)) return false;
    lo.tail(prob.n()) = prob.h.array() - mu_sigma;
    hi.tail(prob.n()) = prob.h.array() + mu_sigma;
  }

  const Vector& y = sol.duals;
  if ((k.transpose() * y).cwiseAbs().maxCoeff() > 1.0 + 1e-7) return false;
  double dual_objective = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    dual_objective += std::min(y[i] * lo[i], y[i] * hi[i]);
  }
  const double primal_objective = sol.b.lpNorm<1>();
  return std::abs(primal_objective - dual_objective) <= 1e-7 * std::max(1.0, primal_objective);
}

}  // namespace tiers
