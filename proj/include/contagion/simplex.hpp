#pragma once

// Bounded-variable primal revised simplex.
//
//   minimize    cost . x
//   subject to  A x = rhs,  lower <= x <= upper
//
// One artificial column per row forms the starting basis. Phase 1 drives the
// artificials to zero (skipped when the start is already feasible); they are
// then fixed at [0, 0] and phase 2 optimizes the real objective. The basis
// inverse is held dense and updated by elementary row operations, with a
// fresh LU reinversion every `refactor_interval` pivots.
//
// Witness LPs have a zero right-hand side and are heavily degenerate, so
// finite bounds of the structural columns are widened by small deterministic
// pseudo-random amounts while the primal phases run. Once optimal, the true
// bounds are restored; the basis is still dual feasible (costs are never
// perturbed) and a bounded dual simplex removes the remaining primal
// infeasibilities.
//
// Pricing is Dantzig (largest reduced cost). After `bland_after` consecutive
// degenerate pivots the solver switches to Bland's rule until the next pivot
// that makes progress.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contagion/errors.hpp"

namespace contagion {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Column-compressed constraint matrix plus bounds and costs.
struct LinearProgram {
  std::size_t rows = 0;
  std::vector<std::size_t> col_start{0};
  std::vector<std::size_t> row_index;
  std::vector<double> value;
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> rhs;

  std::size_t cols() const noexcept { return cost.size(); }
  std::size_t nonzeros() const noexcept { return value.size(); }

  /// Appends a column given as (row, value) pairs; zero values are skipped.
  std::size_t add_column(double c, double lo, double hi,
                         const std::vector<std::pair<std::size_t, double>>& entries) {
    for (const auto& [r, v] : entries) {
      if (r >= rows) throw UsageError("LinearProgram: row index out of range");
      if (v == 0.0) continue;
      row_index.push_back(r);
      value.push_back(v);
    }
    col_start.push_back(row_index.size());
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return cost.size() - 1;
  }

  /// Max over rows of |A x - rhs|.
  double residual(const std::vector<double>& x) const {
    std::vector<double> r(rhs.begin(), rhs.end());
    for (std::size_t j = 0; j < cols(); ++j) {
      for (std::size_t k = col_start[j]; k < col_start[j + 1]; ++k) {
        r[row_index[k]] -= value[k] * x[j];
      }
    }
    double m = 0.0;
    for (double v : r) m = std::max(m, std::fabs(v));
    return m;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  double perturbation = 1e-6;  // relative bound widening; 0 disables
  std::size_t max_iterations = 2'000'000;
  std::size_t refactor_interval = 100;
  std::size_t bland_after = 50;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::string log;
};

class SimplexSolver {
 public:
  SimplexSolver(const LinearProgram& lp, SimplexOptions opts = {})
      : lp_(lp), opts_(opts), m_(lp.rows), n_(lp.cols()) {
    if (lp.lower.size() != n_ || lp.upper.size() != n_ || lp.col_start.size() != n_ + 1 ||
        lp.rhs.size() != m_) {
      throw UsageError("SimplexSolver: inconsistent LinearProgram dimensions");
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (lp.lower[j] > lp.upper[j]) throw UsageError("SimplexSolver: lower > upper");
    }
  }

  LpSolution solve() {
    init();
    LpSolution sol;
    if (phase_one_needed()) {
      set_phase_costs(1);
      const LpStatus s = primal();
      if (s == LpStatus::IterationLimit) return finish(sol, s);
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i) infeas += x_[n_ + i];
      log_ << "phase 1 done: infeasibility " << infeas << " after " << iterations_
           << " iterations\n";
      if (infeas > 1e-7 * std::max<double>(1.0, static_cast<double>(m_))) {
        return finish(sol, LpStatus::Infeasible);
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t a = n_ + i;
      lo_[a] = 0.0;
      hi_[a] = 0.0;
      if (state_[a] != State::Basic) {
        state_[a] = State::AtLower;
        x_[a] = 0.0;
      }
    }
    set_phase_costs(2);
    refactor();
    // Artificials still basic after phase 1 may be slightly off zero; the
    // perturbed bounds absorb that and the dual pass below repairs it.
    LpStatus status = primal();
    if (status != LpStatus::Optimal) return finish(sol, status);

    remove_perturbation();
    for (int round = 0; round < 5; ++round) {
      status = dual();
      if (status != LpStatus::Optimal) return finish(sol, status);
      const std::size_t before = iterations_;
      status = primal();
      if (status != LpStatus::Optimal) return finish(sol, status);
      if (iterations_ == before && max_primal_infeasibility() <= opts_.feasibility_tol) break;
    }
    return finish(sol, status);
  }

 private:
  enum class State { Basic, AtLower, AtUpper, Free };

  static double unit_hash(std::size_t j) {
    std::uint64_t z = static_cast<std::uint64_t>(j) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

  void init() {
    const std::size_t total = n_ + m_;
    lo_.assign(total, 0.0);
    hi_.assign(total, kInf);
    x_.assign(total, 0.0);
    state_.assign(total, State::AtLower);
    art_sign_.assign(m_, 1.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
      if (opts_.perturbation > 0.0 && lo_[j] < hi_[j]) {
        const double w = opts_.perturbation * (0.5 + 0.5 * unit_hash(j));
        if (std::isfinite(lo_[j])) lo_[j] -= w * (1.0 + std::fabs(lo_[j]));
        if (std::isfinite(hi_[j])) hi_[j] += w * (1.0 + std::fabs(hi_[j]));
      }
      if (std::isfinite(lo_[j])) {
        x_[j] = lo_[j];
        state_[j] = State::AtLower;
      } else if (std::isfinite(hi_[j])) {
        x_[j] = hi_[j];
        state_[j] = State::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = State::Free;
      }
    }
    std::vector<double> r(lp_.rhs.begin(), lp_.rhs.end());
    for (std::size_t j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (std::size_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        r[lp_.row_index[k]] -= lp_.value[k] * x_[j];
      }
    }
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      art_sign_[i] = r[i] >= 0.0 ? 1.0 : -1.0;
      basis_[i] = n_ + i;
      state_[n_ + i] = State::Basic;
      x_[n_ + i] = std::fabs(r[i]);
    }
    const auto m = static_cast<Eigen::Index>(m_);
    binv_ = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m_; ++i) {
      binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = art_sign_[i];
    }
    iterations_ = 0;
    since_refactor_ = 0;
    degenerate_total_ = 0;
    log_.str("");
    log_ << "simplex: " << m_ << " rows, " << n_ << " columns, " << lp_.nonzeros()
         << " nonzeros\n";
  }

  bool phase_one_needed() const {
    for (std::size_t i = 0; i < m_; ++i) {
      if (x_[n_ + i] > opts_.feasibility_tol) return true;
    }
    return false;
  }

  void set_phase_costs(int phase) {
    cost_.assign(n_ + m_, 0.0);
    if (phase == 1) {
      for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = 1.0;
    } else {
      for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.cost[j];
    }
  }

  void remove_perturbation() {
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
      if (state_[j] == State::AtLower) x_[j] = lo_[j];
      if (state_[j] == State::AtUpper) x_[j] = hi_[j];
    }
    refactor();
    log_ << "perturbation removed: max primal infeasibility " << max_primal_infeasibility()
         << "\n";
  }

  double infeasibility(std::size_t j) const {
    if (x_[j] < lo_[j]) return lo_[j] - x_[j];
    if (x_[j] > hi_[j]) return x_[j] - hi_[j];
    return 0.0;
  }

  double max_primal_infeasibility() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) worst = std::max(worst, infeasibility(basis_[i]));
    return worst;
  }

  // alpha = B^{-1} a_j
  void ftran(std::size_t j, Eigen::VectorXd& alpha) const {
    if (j >= n_) {
      alpha = binv_.col(static_cast<Eigen::Index>(j - n_)) * art_sign_[j - n_];
      return;
    }
    alpha.setZero(static_cast<Eigen::Index>(m_));
    for (std::size_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
      alpha += lp_.value[k] * binv_.col(static_cast<Eigen::Index>(lp_.row_index[k]));
    }
  }

  template <class Vec>
  double column_dot(std::size_t j, const Vec& y) const {
    if (j >= n_) return art_sign_[j - n_] * y(static_cast<Eigen::Index>(j - n_));
    double s = 0.0;
    for (std::size_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
      s += lp_.value[k] * y(static_cast<Eigen::Index>(lp_.row_index[k]));
    }
    return s;
  }

  void refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = basis_[i];
      const auto col = static_cast<Eigen::Index>(i);
      if (j >= n_) {
        B(static_cast<Eigen::Index>(j - n_), col) = art_sign_[j - n_];
      } else {
        for (std::size_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
          B(static_cast<Eigen::Index>(lp_.row_index[k]), col) = lp_.value[k];
        }
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) {
      throw SolverError("simplex: basis matrix became singular", log_.str());
    }
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(lp_.rhs.data(), m);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::Basic || x_[j] == 0.0) continue;
      if (j >= n_) {
        r(static_cast<Eigen::Index>(j - n_)) -= art_sign_[j - n_] * x_[j];
      } else {
        for (std::size_t k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
          r(static_cast<Eigen::Index>(lp_.row_index[k])) -= lp_.value[k] * x_[j];
        }
      }
    }
    const Eigen::VectorXd xb = binv_ * r;
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb(static_cast<Eigen::Index>(i));
    since_refactor_ = 0;
  }

  void compute_duals(Eigen::VectorXd& y) const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) cb(static_cast<Eigen::Index>(i)) = cost_[basis_[i]];
    y.noalias() = binv_.transpose() * cb;
  }

  // Basis exchange: `enter` replaces the variable in row `leave`.
  void pivot(std::size_t leave, std::size_t enter, Eigen::VectorXd& alpha) {
    const auto r = static_cast<Eigen::Index>(leave);
    const double p = alpha(r);
    basis_[leave] = enter;
    state_[enter] = State::Basic;
    binv_.row(r) /= p;
    const Eigen::RowVectorXd pivot_row = binv_.row(r);
    alpha(r) = 0.0;
    binv_.noalias() -= alpha * pivot_row;
    ++iterations_;
    ++since_refactor_;
  }

  void park(std::size_t j, bool at_upper) {
    if (!std::isfinite(lo_[j]) && !std::isfinite(hi_[j])) {
      state_[j] = State::Free;
      return;
    }
    if (at_upper && !std::isfinite(hi_[j])) at_upper = false;
    if (!at_upper && !std::isfinite(lo_[j])) at_upper = true;
    state_[j] = at_upper ? State::AtUpper : State::AtLower;
    x_[j] = at_upper ? hi_[j] : lo_[j];
  }

  void periodic_log() {
    if (iterations_ % 1000 != 0 || iterations_ == 0 || iterations_ == last_logged_) return;
    last_logged_ = iterations_;
    double obj = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) obj += cost_[j] * x_[j];
    log_ << "iteration " << iterations_ << ": objective " << obj << ", degenerate so far "
         << degenerate_total_ << "\n";
  }

  LpStatus primal() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd y(m), alpha(m);
    std::size_t degenerate_run = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= opts_.max_iterations) return LpStatus::IterationLimit;
      if (since_refactor_ >= opts_.refactor_interval) refactor();
      periodic_log();
      compute_duals(y);

      std::size_t enter = npos;
      double best = 0.0;
      int dir = 0;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        const State s = state_[j];
        if (s == State::Basic || lo_[j] == hi_[j]) continue;
        const double d = cost_[j] - column_dot(j, y);
        int jdir = 0;
        if ((s == State::AtLower || s == State::Free) && d < -opts_.optimality_tol) jdir = +1;
        else if ((s == State::AtUpper || s == State::Free) && d > opts_.optimality_tol) jdir = -1;
        if (jdir == 0) continue;
        if (bland) {
          enter = j;
          dir = jdir;
          break;
        }
        if (std::fabs(d) > best) {
          best = std::fabs(d);
          enter = j;
          dir = jdir;
        }
      }
      if (enter == npos) return LpStatus::Optimal;

      ftran(enter, alpha);

      // Harris two-pass ratio test. Basic variable i moves at rate -dir * alpha_i.
      const double flip = hi_[enter] - lo_[enter];
      double theta_max = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double rate = -dir * alpha(static_cast<Eigen::Index>(i));
        if (std::fabs(rate) <= opts_.pivot_tol) continue;
        const std::size_t b = basis_[i];
        const double bound = rate < 0 ? lo_[b] : hi_[b];
        if (!std::isfinite(bound)) continue;
        const double room = (rate < 0 ? x_[b] - lo_[b] : hi_[b] - x_[b]) + opts_.feasibility_tol;
        theta_max = std::min(theta_max, std::max(room, 0.0) / std::fabs(rate));
      }
      std::size_t leave = npos;
      double theta = kInf;
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double rate = -dir * alpha(static_cast<Eigen::Index>(i));
        if (std::fabs(rate) <= opts_.pivot_tol) continue;
        const std::size_t b = basis_[i];
        const double bound = rate < 0 ? lo_[b] : hi_[b];
        if (!std::isfinite(bound)) continue;
        const double step =
            std::max(rate < 0 ? x_[b] - lo_[b] : hi_[b] - x_[b], 0.0) / std::fabs(rate);
        if (step > theta_max) continue;
        bool take;
        if (bland) {
          take = leave == npos || step < theta - 1e-15 ||
                 (step <= theta + 1e-15 && b < basis_[leave]);
        } else {
          take = std::fabs(rate) > best_pivot;
        }
        if (take) {
          leave = i;
          theta = step;
          best_pivot = std::fabs(rate);
        }
      }

      if (leave == npos && !std::isfinite(flip)) {
        log_ << "unbounded direction on column " << enter << "\n";
        return LpStatus::Unbounded;
      }

      if (leave == npos || flip <= theta) {
        for (std::size_t i = 0; i < m_; ++i) {
          x_[basis_[i]] -= dir * flip * alpha(static_cast<Eigen::Index>(i));
        }
        park(enter, dir > 0);
        ++iterations_;
        ++since_refactor_;
        degenerate_run = 0;
        bland = false;
        continue;
      }

      for (std::size_t i = 0; i < m_; ++i) {
        x_[basis_[i]] -= dir * theta * alpha(static_cast<Eigen::Index>(i));
      }
      x_[enter] += dir * theta;
      const std::size_t out = basis_[leave];
      const double out_rate = -dir * alpha(static_cast<Eigen::Index>(leave));
      pivot(leave, enter, alpha);
      park(out, out_rate > 0);

      if (theta * best_pivot <= 1e-12) {
        ++degenerate_total_;
        if (++degenerate_run >= opts_.bland_after && !bland) {
          bland = true;
        }
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  // Bounded dual simplex from a dual feasible basis.
  LpStatus dual() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd y(m), alpha(m);
    while (true) {
      if (iterations_ >= opts_.max_iterations) return LpStatus::IterationLimit;
      if (since_refactor_ >= opts_.refactor_interval) refactor();
      periodic_log();

      std::size_t leave = npos;
      double worst = opts_.feasibility_tol;
      for (std::size_t i = 0; i < m_; ++i) {
        const double inf = infeasibility(basis_[i]);
        if (inf > worst) {
          worst = inf;
          leave = i;
        }
      }
      if (leave == npos) return LpStatus::Optimal;

      const std::size_t out = basis_[leave];
      const bool below = x_[out] < lo_[out];
      const double target = below ? lo_[out] : hi_[out];
      compute_duals(y);
      const Eigen::VectorXd rho = binv_.row(static_cast<Eigen::Index>(leave)).transpose();

      // x_out changes by -delta * alpha_rj when nonbasic j moves by delta.
      std::size_t enter = npos;
      double best_ratio = kInf;
      double best_pivot = 0.0;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        const State s = state_[j];
        if (s == State::Basic || lo_[j] == hi_[j]) continue;
        const double arj = column_dot(j, rho);
        if (std::fabs(arj) <= opts_.pivot_tol) continue;
        const int need = below ? (arj < 0 ? +1 : -1) : (arj > 0 ? +1 : -1);
        if (need > 0 && s == State::AtUpper) continue;
        if (need < 0 && s == State::AtLower) continue;
        const double dj = cost_[j] - column_dot(j, y);
        const double ratio = std::fabs(dj) / std::fabs(arj);
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && std::fabs(arj) > best_pivot)) {
          best_ratio = ratio;
          best_pivot = std::fabs(arj);
          enter = j;
        }
      }
      if (enter == npos) {
        log_ << "dual simplex: row " << leave << " cannot be repaired\n";
        return LpStatus::Infeasible;
      }
      ftran(enter, alpha);
      const double arq = alpha(static_cast<Eigen::Index>(leave));
      const double delta = (x_[out] - target) / arq;
      for (std::size_t i = 0; i < m_; ++i) {
        x_[basis_[i]] -= delta * alpha(static_cast<Eigen::Index>(i));
      }
      x_[enter] += delta;
      pivot(leave, enter, alpha);
      park(out, !below);
    }
  }

  LpSolution& finish(LpSolution& sol, LpStatus status) {
    if (status == LpStatus::Optimal) refactor();
    sol.status = status;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.cost[j] * sol.x[j];
    sol.residual = lp_.residual(sol.x);
    sol.iterations = iterations_;
    log_ << "status " << to_string(status) << " objective " << sol.objective << " residual "
         << sol.residual << " iterations " << iterations_ << " degenerate " << degenerate_total_
         << "\n";
    if (status == LpStatus::Optimal) {
      double bound_violation = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        bound_violation =
            std::max({bound_violation, lp_.lower[j] - sol.x[j], sol.x[j] - lp_.upper[j]});
      }
      double art = 0.0;
      for (std::size_t i = 0; i < m_; ++i) art = std::max(art, std::fabs(x_[n_ + i]));
      if (bound_violation > 1e-7 || art > 1e-7 || sol.residual > 1e-7) {
        log_ << "bound violation " << bound_violation << ", artificial " << art << "\n";
        throw SolverError("simplex: final solution failed feasibility check", log_.str());
      }
    }
    sol.log = log_.str();
    return sol;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const LinearProgram& lp_;
  SimplexOptions opts_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> lo_, hi_, x_, cost_, art_sign_;
  std::vector<State> state_;
  std::vector<std::size_t> basis_;
  Eigen::MatrixXd binv_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t degenerate_total_ = 0;
  std::size_t last_logged_ = 0;
  std::ostringstream log_;
};

inline LpSolution solve_lp(const LinearProgram& lp, SimplexOptions opts = {}) {
  return SimplexSolver(lp, opts).solve();
}

}  // namespace contagion
