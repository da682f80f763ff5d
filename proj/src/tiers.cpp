#include "tiers/tiers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tiers/error.hpp"
#include "tiers/parallel.hpp"
#include "tiers/rng.hpp"

namespace tiers {

namespace {

constexpr int kSimBlock = 64;

template <class Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DegenerateFitError& e) {
    throw DegenerateFitError(std::string(stage) + ": " + e.what(), e.trace());
  } catch (const DegenerateStatisticError& e) {
    throw DegenerateStatisticError(std::string(stage) + ": " + e.what());
  }
}

AddsFit fit_theta(const ConvolvedData& conv, double eta, SideConstraint side) {
  if (conv.y.squaredNorm() == 0.0) {
    throw DegenerateFitError("convolved response Y is identically zero");
  }
  AddsFit f = fit(DantzigProblem{conv.w, conv.y, eta, side});
  if (!(f.sigma_hat > 0.0)) {
    throw DegenerateFitError("fitted residual scale is zero", f.search_trace);
  }
  return f;
}

TestResult run_variant(const TwoSampleData& data, double alpha, const TiersConfig& config,
                       Variant variant) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (config.draws < 1000) throw ArgumentError("draws must be at least 1000");
  const ConvolvedData conv = convolve(data);
  const int threads = resolve_threads(config.threads);

  TestResult res;
  res.alpha = alpha;
  res.variant = variant;
  res.sim_draws = config.draws;
  res.seed = config.seed;
  res.eta = config.eta ? *config.eta : eta_adaptive(conv.w);
  if (!(res.eta > 0.0)) throw ArgumentError("eta must be positive");

  AddsFit theta;
  if (variant == Variant::TiersPlus) {
    res.mu = config.mu ? *config.mu : default_mu(conv.n(), conv.p(), config.mu_scale);
    theta = with_stage("theta+", [&] { return estimate_theta_plus(conv, res.eta, res.mu); });
  } else {
    theta = with_stage("theta", [&] { return estimate_theta(conv, res.eta); });
  }
  const PiEstimate pi = with_stage("pi", [&] { return estimate_pi(conv, res.eta, threads); });

  res.t_n = with_stage("statistic", [&] { return test_statistic(conv, pi, theta); });
  res.sigma_hat_u = theta.sigma_hat;
  res.sigma_tilde_u = theta.sigma_tilde;
  res.degenerate_columns = pi.degenerate_count();
  res.lp_solves = theta.n_path_solves;

  Vector weights;
  if (config.weighted_qhat) weights = theta.residuals / theta.sigma_hat;
  const MaxQuantile sim =
      simulate_max_quantile(pi.vhat, alpha, config.draws, config.seed, weights, threads);
  res.critical_value = sim.critical_value;
  res.p_value = sim.tail_fraction(res.t_n);
  res.reject = res.t_n > res.critical_value;
  return res;
}

}  // namespace

long PiEstimate::degenerate_count() const {
  return static_cast<long>(std::count(degenerate.begin(), degenerate.end(), char{1}));
}

const char* to_string(Variant v) { return v == Variant::Tiers ? "TIERS" : "TIERS+"; }

PiEstimate estimate_pi(const ConvolvedData& conv, double eta, int threads) {
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  const Eigen::Index p = conv.p();
  PiEstimate out;
  out.pi = Matrix::Zero(p, p);
  out.sigma_tilde_cols = Vector::Zero(p);
  out.degenerate.assign(static_cast<std::size_t>(p), 0);

  parallel_for(p, threads, [&](long j) {
    if (conv.z.col(j).squaredNorm() == 0.0) {
      out.degenerate[static_cast<std::size_t>(j)] = 1;
      return;
    }
    try {
      AddsFit f = fit(DantzigProblem{conv.w, conv.z.col(j), eta, SideConstraint::none()});
      out.pi.col(j) = f.b;
      out.sigma_tilde_cols[j] = f.sigma_tilde;
    } catch (const DegenerateFitError& e) {
      throw DegenerateFitError("column " + std::to_string(j) + ": " + e.what(), e.trace());
    }
  });

  if (out.degenerate_count() == p) {
    throw DegenerateFitError("every column of Z is identically zero (X_A == X_B)");
  }
  out.vhat = conv.z - conv.w * out.pi;
  return out;
}

AddsFit estimate_theta(const ConvolvedData& conv, double eta) {
  return fit_theta(conv, eta, SideConstraint::none());
}

AddsFit estimate_theta_plus(const ConvolvedData& conv, double eta, double mu) {
  return fit_theta(conv, eta, SideConstraint::residual_sup_norm(mu));
}

Matrix qhat(const PiEstimate& pi_est) {
  const double n = static_cast<double>(pi_est.vhat.rows());
  Matrix q = pi_est.vhat.transpose() * pi_est.vhat / n;
  return q;
}

double test_statistic(const ConvolvedData& conv, const PiEstimate& pi_est,
                      const AddsFit& theta_fit) {
  const double n = static_cast<double>(conv.n());
  const Vector resid = conv.y - conv.w * theta_fit.b;
  const double sigma_u = resid.norm() / std::sqrt(n);
  if (!(sigma_u > 0.0)) {
    throw DegenerateStatisticError("residual scale sigma_u is zero; statistic undefined");
  }
  const Vector moments = pi_est.vhat.transpose() * resid;
  return moments.cwiseAbs().maxCoeff() / (std::sqrt(n) * sigma_u);
}

double MaxQuantile::tail_fraction(double t) const {
  if (sorted_maxima.empty()) return 1.0;
  const auto it = std::lower_bound(sorted_maxima.begin(), sorted_maxima.end(), t);
  return static_cast<double>(sorted_maxima.end() - it) /
         static_cast<double>(sorted_maxima.size());
}

MaxQuantile simulate_max_quantile(const Matrix& vhat, double alpha, int draws, std::uint64_t seed,
                                  const Vector& row_weights, int threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (draws < 1000) throw ArgumentError("draws must be at least 1000");
  const Eigen::Index n = vhat.rows();
  if (row_weights.size() != 0 && row_weights.size() != n) {
    throw DimensionError("n", "row weights do not match the rows of V");
  }
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix v = vhat;
  if (row_weights.size() != 0) v = row_weights.asDiagonal() * v;

  MaxQuantile out;
  out.sorted_maxima.assign(static_cast<std::size_t>(draws), 0.0);
  const long blocks = (draws + kSimBlock - 1) / kSimBlock;
  parallel_for(blocks, threads, [&](long blk) {
    const int first = static_cast<int>(blk) * kSimBlock;
    const int count = std::min(kSimBlock, draws - first);
    Matrix g(n, count);
    for (int c = 0; c < count; ++c) {
      RngStream rng = rng_stream(seed, static_cast<std::uint64_t>(first + c));
      rng.fill_normal(g.col(c));
    }
    const Matrix xi = v.transpose() * g;
    for (int c = 0; c < count; ++c) {
      out.sorted_maxima[static_cast<std::size_t>(first + c)] =
          xi.rows() == 0 ? 0.0 : xi.col(c).cwiseAbs().maxCoeff() * inv_sqrt_n;
    }
  });
  std::sort(out.sorted_maxima.begin(), out.sorted_maxima.end());
  long k = static_cast<long>(std::ceil((1.0 - alpha) * draws - 1e-9));
  k = std::clamp(k, 1L, static_cast<long>(draws));
  out.critical_value = out.sorted_maxima[static_cast<std::size_t>(k - 1)];
  return out;
}

double default_mu(Eigen::Index n, Eigen::Index p, double mu_scale) {
  if (!(mu_scale > 0.0)) throw ArgumentError("mu_scale must be positive");
  const double log_p = std::log(static_cast<double>(std::max<Eigen::Index>(p, 2)));
  return mu_scale * std::pow(static_cast<double>(n), 1.0 / 9.0) * std::cbrt(log_p);
}

TestResult run_tiers(const TwoSampleData& data, double alpha, const TiersConfig& config) {
  return run_variant(data, alpha, config, Variant::Tiers);
}

TestResult run_tiers_plus(const TwoSampleData& data, double alpha, const TiersConfig& config) {
  return run_variant(data, alpha, config, Variant::TiersPlus);
}

}  // namespace tiers
