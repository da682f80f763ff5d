#include "dual_simplex.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tiers/error.hpp"

namespace tiers::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

L1BoxDualSimplex::L1BoxDualSimplex(Eigen::MatrixXd k)
    : k_(std::move(k)), m_(k_.rows()), p_(k_.cols()) {
  const Eigen::Index nvar = 2 * p_ + m_;
  basis_.resize(static_cast<std::size_t>(m_));
  state_.assign(static_cast<std::size_t>(nvar), VarState::Lower);
  for (Eigen::Index i = 0; i < m_; ++i) {
    basis_[static_cast<std::size_t>(i)] = 2 * p_ + i;
    state_[static_cast<std::size_t>(2 * p_ + i)] = VarState::Basic;
  }
  binv_ = -Eigen::MatrixXd::Identity(m_, m_);
  d_ = Eigen::VectorXd::Zero(nvar);
  d_.head(2 * p_).setOnes();
  lo_ = Eigen::VectorXd::Zero(m_);
  hi_ = Eigen::VectorXd::Zero(m_);
  xb_ = Eigen::VectorXd::Zero(m_);
}

double L1BoxDualSimplex::lower(Eigen::Index j) const {
  return is_structural(j) ? 0.0 : lo_[j - 2 * p_];
}

double L1BoxDualSimplex::upper(Eigen::Index j) const {
  return is_structural(j) ? kInf : hi_[j - 2 * p_];
}

double L1BoxDualSimplex::nonbasic_value(Eigen::Index j) const {
  if (is_structural(j)) return 0.0;
  return state_[static_cast<std::size_t>(j)] == VarState::Upper ? hi_[j - 2 * p_]
                                                                 : lo_[j - 2 * p_];
}

void L1BoxDualSimplex::column(Eigen::Index j, Eigen::VectorXd& out) const {
  if (j < p_) {
    out = k_.col(j);
  } else if (j < 2 * p_) {
    out = -k_.col(j - p_);
  } else {
    out = Eigen::VectorXd::Zero(m_);
    out[j - 2 * p_] = -1.0;
  }
}

void L1BoxDualSimplex::refactor() {
  Eigen::MatrixXd b(m_, m_);
  Eigen::VectorXd col;
  for (Eigen::Index r = 0; r < m_; ++r) {
    column(basis_[static_cast<std::size_t>(r)], col);
    b.col(r) = col;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  if (!(lu.rcond() > 1e-14)) {
    throw SolverError("basis matrix became numerically singular", total_iterations_);
  }
  binv_ = lu.inverse();
  updates_since_refactor_ = 0;
}

void L1BoxDualSimplex::compute_primal() {
  // B x_B + N x_N = 0 and the only nonzero nonbasic columns are logicals (-e_i).
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
  for (Eigen::Index i = 0; i < m_; ++i) {
    const Eigen::Index j = 2 * p_ + i;
    if (state_[static_cast<std::size_t>(j)] != VarState::Basic) v[i] = nonbasic_value(j);
  }
  xb_.noalias() = binv_ * v;
}

void L1BoxDualSimplex::compute_duals() {
  Eigen::VectorXd cb(m_);
  for (Eigen::Index r = 0; r < m_; ++r) cb[r] = cost(basis_[static_cast<std::size_t>(r)]);
  const Eigen::VectorXd y = binv_.transpose() * cb;
  const Eigen::VectorXd kty = k_.transpose() * y;
  for (Eigen::Index j = 0; j < p_; ++j) {
    d_[j] = 1.0 - kty[j];
    d_[p_ + j] = 1.0 + kty[j];
  }
  d_.tail(m_) = y;
  for (Eigen::Index j = 0; j < d_.size(); ++j) {
    const auto s = state_[static_cast<std::size_t>(j)];
    if (s == VarState::Basic) {
      d_[j] = 0.0;
    } else if (is_structural(j) && d_[j] < 0.0) {
      d_[j] = 0.0;  // cost shift against rounding drift
    }
  }
}

void L1BoxDualSimplex::align_logical_bounds() {
  for (Eigen::Index i = 0; i < m_; ++i) {
    const Eigen::Index j = 2 * p_ + i;
    auto& s = state_[static_cast<std::size_t>(j)];
    if (s != VarState::Basic) s = d_[j] >= 0.0 ? VarState::Lower : VarState::Upper;
  }
}

L1BoxDualSimplex::Status L1BoxDualSimplex::solve(const Eigen::VectorXd& lo,
                                                  const Eigen::VectorXd& hi) {
  lo_ = lo;
  hi_ = hi;
  align_logical_bounds();
  compute_primal();

  const long max_iterations = 50 * (m_ + 2 * p_) + 1000;
  int degenerate_run = 0;
  bool bland = false;
  last_iterations_ = 0;

  Eigen::VectorXd rho(m_), krho(p_), alpha_col(m_), acol(m_);

  for (;;) {
    if (updates_since_refactor_ >= kRefactorInterval) {
      refactor();
      compute_duals();
      align_logical_bounds();
      compute_primal();
    }

    // Leaving row: largest bound violation, or lowest variable index once stalled.
    Eigen::Index r = -1;
    double worst = 0.0;
    Eigen::Index r_var = std::numeric_limits<Eigen::Index>::max();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index var = basis_[static_cast<std::size_t>(i)];
      const double x = xb_[i];
      const double viol = std::max(lower(var) - x, x - upper(var));
      if (viol <= kPrimalTol * (1.0 + std::abs(x))) continue;
      if (bland) {
        if (var < r_var) {
          r_var = var;
          r = i;
        }
      } else if (viol > worst) {
        worst = viol;
        r = i;
      }
    }
    if (r < 0) return Status::Optimal;

    if (last_iterations_ >= max_iterations) {
      throw SolverError("dual simplex iteration limit reached (" +
                            std::to_string(last_iterations_) + " pivots, " +
                            std::to_string(m_) + " rows, " + std::to_string(p_) + " columns)",
                        total_iterations_);
    }

    const Eigen::Index leaving = basis_[static_cast<std::size_t>(r)];
    const bool to_lower = xb_[r] < lower(leaving);

    rho = binv_.row(r).transpose();
    krho.noalias() = k_.transpose() * rho;
    auto alpha_row = [&](Eigen::Index j) -> double {
      if (j < p_) return krho[j];
      if (j < 2 * p_) return -krho[j - p_];
      return -rho[j - 2 * p_];
    };

    // Ratio test. A nonbasic j is eligible when moving it pushes the leaving
    // variable toward its violated bound; its reduced cost then shrinks at
    // rate |alpha_rj| as the dual step grows.
    const Eigen::Index nvar = 2 * p_ + m_;
    auto eligible = [&](Eigen::Index j, double a, double& dj_eff) -> bool {
      const auto s = state_[static_cast<std::size_t>(j)];
      if (s == VarState::Basic) return false;
      if (!is_structural(j) && lower(j) == upper(j)) return false;
      if (std::abs(a) <= kPivotTol) return false;
      const bool at_lower = s == VarState::Lower;
      const bool ok = to_lower ? (at_lower ? a < 0.0 : a > 0.0) : (at_lower ? a > 0.0 : a < 0.0);
      if (!ok) return false;
      dj_eff = at_lower ? d_[j] : -d_[j];
      return true;
    };

    Eigen::Index q = -1;
    if (!bland) {
      double theta_max = kInf;
      for (Eigen::Index j = 0; j < nvar; ++j) {
        double dj;
        const double a = alpha_row(j);
        if (!eligible(j, a, dj)) continue;
        theta_max = std::min(theta_max, (std::max(dj, 0.0) + kDualTol) / std::abs(a));
      }
      double best = -1.0;
      for (Eigen::Index j = 0; j < nvar; ++j) {
        double dj;
        const double a = alpha_row(j);
        if (!eligible(j, a, dj)) continue;
        if (std::max(dj, 0.0) / std::abs(a) <= theta_max && std::abs(a) > best) {
          best = std::abs(a);
          q = j;
        }
      }
    } else {
      double theta_min = kInf;
      for (Eigen::Index j = 0; j < nvar; ++j) {
        double dj;
        const double a = alpha_row(j);
        if (!eligible(j, a, dj)) continue;
        theta_min = std::min(theta_min, std::max(dj, 0.0) / std::abs(a));
      }
      for (Eigen::Index j = 0; j < nvar && q < 0; ++j) {
        double dj;
        const double a = alpha_row(j);
        if (!eligible(j, a, dj)) continue;
        if (std::max(dj, 0.0) / std::abs(a) <= theta_min + 1e-12 * (1.0 + theta_min)) q = j;
      }
    }
    if (q < 0) return Status::Infeasible;

    const double a_rq = alpha_row(q);
    column(q, acol);
    alpha_col.noalias() = binv_ * acol;
    if (std::abs(alpha_col[r] - a_rq) > 1e-7 * (1.0 + std::abs(a_rq))) {
      if (updates_since_refactor_ > 0) {
        updates_since_refactor_ = kRefactorInterval;  // rebuild and re-price
        continue;
      }
    }
    const double pivot = alpha_col[r];

    // Dual update.
    double dq_eff = state_[static_cast<std::size_t>(q)] == VarState::Lower ? d_[q] : -d_[q];
    const double theta_d = std::max(dq_eff, 0.0) / std::abs(a_rq);
    const double sign = to_lower ? 1.0 : -1.0;
    if (theta_d != 0.0) {
      for (Eigen::Index j = 0; j < nvar; ++j) {
        const auto s = state_[static_cast<std::size_t>(j)];
        if (s == VarState::Basic) continue;
        d_[j] += sign * theta_d * alpha_row(j);
        if (s == VarState::Lower && d_[j] < 0.0 && (is_structural(j) || lower(j) != upper(j)))
          d_[j] = 0.0;
        else if (s == VarState::Upper && d_[j] > 0.0 && lower(j) != upper(j))
          d_[j] = 0.0;
      }
    }
    d_[q] = 0.0;
    d_[leaving] = sign * theta_d;

    // Primal update.
    const double target = to_lower ? lower(leaving) : upper(leaving);
    const double t = (xb_[r] - target) / pivot;
    const double xq = nonbasic_value(q) + t;
    xb_.noalias() -= t * alpha_col;
    xb_[r] = xq;

    state_[static_cast<std::size_t>(leaving)] = to_lower ? VarState::Lower : VarState::Upper;
    state_[static_cast<std::size_t>(q)] = VarState::Basic;
    basis_[static_cast<std::size_t>(r)] = q;

    // Basis inverse: eliminate alpha_col against row r.
    const Eigen::RowVectorXd prow = binv_.row(r) / pivot;
    binv_.noalias() -= alpha_col * prow;
    binv_.row(r) = prow;
    ++updates_since_refactor_;

    ++last_iterations_;
    ++total_iterations_;
    if (theta_d <= 1e-12) {
      if (++degenerate_run >= kStallThreshold) bland = true;
    } else {
      degenerate_run = 0;
    }
  }
}

Eigen::VectorXd L1BoxDualSimplex::primal() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p_);
  for (Eigen::Index r = 0; r < m_; ++r) {
    const Eigen::Index j = basis_[static_cast<std::size_t>(r)];
    if (j < p_)
      b[j] += xb_[r];
    else if (j < 2 * p_)
      b[j - p_] -= xb_[r];
  }
  return b;
}

Eigen::VectorXd L1BoxDualSimplex::row_duals() const {
  Eigen::VectorXd cb(m_);
  for (Eigen::Index r = 0; r < m_; ++r) cb[r] = cost(basis_[static_cast<std::size_t>(r)]);
  return binv_.transpose() * cb;
}

}  // namespace tiers::detail
