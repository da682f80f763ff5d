#include "tiers/adds.hpp"

#include <cmath>
#include <optional>

namespace tiers {

namespace {

struct Probe {
  double sigma;
  DantzigSolution sol;
  Vector residuals;
  bool admissible;
};

}  // namespace

AddsFit fit(const DantzigProblem& prob, const AddsSearchOptions& options) {
  prob.validate();
  if (options.grid_points < 2 || !(options.lower_ratio > 0.0 && options.lower_ratio < 1.0) ||
      !(options.relative_tolerance > 0.0)) {
    throw ArgumentError("invalid ADDS search options");
  }
  const double n = static_cast<double>(prob.n());
  const double h_norm = prob.h.norm();

  AddsFit out;
  if (h_norm == 0.0) {
    out.b = Vector::Zero(prob.p());
    out.residuals = Vector::Zero(prob.n());
    return out;
  }

  // Beyond sqrt(2) ||H|| / sqrt(n) even the zero fit fails the energy constraint.
  const double sigma_upper = std::sqrt(2.0) * h_norm / std::sqrt(n) * (1.0 + 1e-9);
  const double sigma_lo = sigma_upper * options.lower_ratio;

  DantzigSolver solver(prob);
  auto probe = [&](double sigma) {
    Probe pr{sigma, solver.solve(sigma), {}, false};
    pr.residuals = prob.h - prob.g * pr.sol.b;
    pr.admissible =
        pr.sol.status == LpStatus::Optimal && pr.residuals.squaredNorm() >= n * sigma * sigma / 2.0;
    out.search_trace.push_back({sigma, pr.admissible});
    ++out.n_path_solves;
    return pr;
  };

  const int last = options.grid_points - 1;
  const double log_ratio = std::log(sigma_upper / sigma_lo);
  auto grid = [&](int k) {
    return k == last ? sigma_upper : sigma_lo * std::exp(log_ratio * k / last);
  };

  // Largest admissible grid point, scanning down from the top.
  std::optional<Probe> best;
  int k = last;
  for (; k >= 0; --k) {
    Probe pr = probe(grid(k));
    if (pr.admissible) {
      best = std::move(pr);
      break;
    }
  }
  if (!best) {
    throw DegenerateFitError("no admissible scale in [" + std::to_string(sigma_lo) + ", " +
                                 std::to_string(sigma_upper) + "]",
                             out.search_trace);
  }

  if (k == last) {
    out.bracket_top_feasible = true;
  } else {
    double lo = best->sigma;
    double hi = grid(k + 1);
    while (hi - lo > options.relative_tolerance * hi) {
      Probe pr = probe(0.5 * (lo + hi));
      if (pr.admissible) {
        lo = pr.sigma;
        best = std::move(pr);
      } else {
        hi = pr.sigma;
      }
    }
  }

  out.b = std::move(best->sol.b);
  out.sigma_tilde = best->sigma;
  out.residuals = std::move(best->residuals);
  out.sigma_hat = out.residuals.norm() / std::sqrt(n);
  return out;
}

double eta_adaptive(const Matrix& g) {
  if (g.rows() < 1 || g.cols() < 1) throw DimensionError("p", "empty design");
  const double n = static_cast<double>(g.rows());
  const double p = static_cast<double>(g.cols());
  const double max_col = g.colwise().norm().maxCoeff();
  const double eta = std::sqrt(2.0 * std::log(p) / n) * max_col / std::sqrt(n);
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ArgumentError("adaptive eta is zero or non-finite (all-zero design or p = 1)");
  }
  return eta;
}

}  // namespace tiers
