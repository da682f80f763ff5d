#pragma once

#include <vector>

#include "tiers/dantzig.hpp"
#include "tiers/error.hpp"

namespace tiers {

/// Result of the auto-adaptive Dantzig selector: the path point b(sigma~) at
/// the largest scale whose residual energy still satisfies
/// ||H - G b(sigma)||_2^2 >= n sigma^2 / 2.
struct AddsFit {
  Vector b;
  double sigma_tilde = 0.0;
  /// ||H - G b||_2 / sqrt(n)
  double sigma_hat = 0.0;
  Vector residuals;
  int n_path_solves = 0;
  /// Every scale probed, in probe order.
  std::vector<ScaleProbe> search_trace;
  /// The top of the search bracket was itself admissible (the bracket assumption failed).
  bool bracket_top_feasible = false;
};

struct AddsSearchOptions {
  int grid_points = 32;
  double lower_ratio = 1e-6;
  double relative_tolerance = 1e-4;
};

/// Fits the ADDS estimator for `prob`. For H = 0 the zero fit (b = 0,
/// sigma~ = sigma^ = 0) is returned. Throws DegenerateFitError carrying the
/// probe trace when no scale in the bracket is admissible.
AddsFit fit(const DantzigProblem& prob, const AddsSearchOptions& options = {});

/// eta = sqrt(2 log p / n) * max_j ||G_j||_2 / sqrt(n).
double eta_adaptive(const Matrix& g);

}  // namespace tiers
