#pragma once

// Self-contained LP kernel: a bounded-variable, two-phase revised primal
// simplex over dense basis inverses.  Returns optimal primal and dual values
// or a verifying Farkas certificate of infeasibility.
//
// Maximisation form:
//   max c.x  s.t.  rows (sparse, <=/==/>=),  lo <= x <= hi.
//
// Row duals follow the usual convention for maximisation: duals of <= rows
// are nonnegative, duals of >= rows nonpositive, duals of equalities free.
// The duality gap identity used throughout is
//   c.x == b.y + sum_j x_j * d_j,
// with d the reduced costs, which folds the bound duals (beta = max(0,-d) at
// lower bounds, gamma = max(0,d) at upper bounds) into one expression.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

namespace nsnm::lp {

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct Row {
  std::vector<std::pair<int, double>> coeffs;  // sorted by column
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

struct Problem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  int add_var(double lo, double hi, double obj) {
    objective.push_back(obj);
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars++;
  }

  void add_row(std::vector<std::pair<int, double>> coeffs, RowSense sense,
               double rhs) {
    std::sort(coeffs.begin(), coeffs.end());
    rows.push_back(Row{std::move(coeffs), sense, rhs});
  }

  int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct Tolerances {
  double feasibility = 1e-8;
  double optimality = 1e-9;
  double pivot = 1e-11;
  int refactor_every = 50;
  long max_iterations = 0;  // 0: derived from problem size
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;              // structural variables
  std::vector<double> row_duals;      // per row
  std::vector<double> reduced_costs;  // per structural variable

  // Infeasibility certificate: multipliers pi on rows plus bound multipliers
  // beta (lower) and gamma (upper) on structurals with
  //   A^T pi + gamma - beta ~ 0   and   b.pi + u.gamma - l.beta < 0.
  std::vector<double> farkas_rows;
  std::vector<double> farkas_lower;
  std::vector<double> farkas_upper;
  double farkas_value = 0.0;

  long iterations = 0;
  std::string message;
};

namespace detail {

constexpr double kBig = std::numeric_limits<double>::infinity();

enum class VStat : unsigned char { Basic, AtLower, AtUpper };

class Simplex {
 public:
  Simplex(const Problem& p, const Tolerances& tol) : p_(p), tol_(tol) {
    m_ = p.num_rows();
    n_struct_ = p.num_vars;
    n_total_ = n_struct_ + 2 * m_;  // structurals, slacks, artificials
    build_columns();
  }

  Solution run() {
    Solution sol;
    long cap = tol_.max_iterations > 0
                   ? tol_.max_iterations
                   : 200L * (m_ + n_total_) + 20000L;

    init_point();
    if (needs_phase1_) {
      StepResult r = iterate(phase1_cost_, cap, &sol);
      if (r != StepResult::Optimal) return sol;
      double infeas = phase1_value();
      if (infeas > tol_.feasibility) {
        extract_farkas(sol);
        sol.iterations = iterations_;
        return sol;
      }
      // Pin the artificials and continue with the true objective.
      for (int j = n_struct_ + m_; j < n_total_; ++j) {
        ub_[j] = 0.0;
        if (stat_[j] != VStat::Basic) x_[j] = 0.0;
      }
    }
    StepResult r = iterate(cost_, cap, &sol);
    if (r != StepResult::Optimal) return sol;
    extract_optimal(sol);
    sol.iterations = iterations_;
    return sol;
  }

 private:
  enum class StepResult { Optimal, Aborted };

  const Problem& p_;
  Tolerances tol_;
  int m_ = 0, n_struct_ = 0, n_total_ = 0;

  // Sparse columns.
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lb_, ub_, cost_, phase1_cost_;
  std::vector<double> x_;
  std::vector<VStat> stat_;
  std::vector<int> basis_;      // variable at each basis position
  std::vector<double> binv_;    // dense m x m row-major
  bool needs_phase1_ = false;
  long iterations_ = 0;
  int pivots_since_refactor_ = 0;
  int degenerate_streak_ = 0;
  bool bland_ = false;

  double& binv(int i, int j) { return binv_[i * m_ + j]; }

  void build_columns() {
    cols_.resize(n_total_);
    lb_.assign(n_total_, 0.0);
    ub_.assign(n_total_, 0.0);
    cost_.assign(n_total_, 0.0);
    phase1_cost_.assign(n_total_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      lb_[j] = p_.lower[j];
      ub_[j] = p_.upper[j];
      cost_[j] = p_.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      const Row& row = p_.rows[i];
      for (const auto& [j, v] : row.coeffs)
        if (v != 0.0) cols_[j].push_back({i, v});
      int s = n_struct_ + i;
      cols_[s].push_back({i, 1.0});
      switch (row.sense) {
        case RowSense::LessEqual:
          lb_[s] = 0.0;
          ub_[s] = kBig;
          break;
        case RowSense::GreaterEqual:
          lb_[s] = -kBig;
          ub_[s] = 0.0;
          break;
        case RowSense::Equal:
          lb_[s] = ub_[s] = 0.0;
          break;
      }
      // Artificial column; direction chosen in init_point.
      phase1_cost_[n_struct_ + m_ + i] = -1.0;
    }
  }

  void init_point() {
    x_.assign(n_total_, 0.0);
    stat_.assign(n_total_, VStat::AtLower);
    basis_.assign(m_, -1);
    for (int j = 0; j < n_struct_; ++j) {
      // Start at the finite bound closest to zero.
      double lo = lb_[j], hi = ub_[j];
      double v;
      VStat st;
      if (std::isfinite(lo) && (!std::isfinite(hi) || std::abs(lo) <= std::abs(hi))) {
        v = lo;
        st = VStat::AtLower;
      } else if (std::isfinite(hi)) {
        v = hi;
        st = VStat::AtUpper;
      } else {
        v = 0.0;
        st = VStat::AtLower;  // free variables are not used by this project
      }
      x_[j] = v;
      stat_[j] = st;
    }
    // Row activity of the structural start point.
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < n_struct_; ++j)
      if (x_[j] != 0.0)
        for (const auto& [i, v] : cols_[j]) act[i] += v * x_[j];

    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      int s = n_struct_ + i;
      int a = n_struct_ + m_ + i;
      double raw = p_.rows[i].rhs - act[i];
      double clamped = std::min(std::max(raw, lb_[s]), ub_[s]);
      if (std::abs(raw - clamped) <= tol_.feasibility) {
        basis_[i] = s;
        stat_[s] = VStat::Basic;
        x_[s] = raw;
        x_[a] = 0.0;
        lb_[a] = ub_[a] = 0.0;
        binv(i, i) = 1.0;
      } else {
        double sigma = raw - clamped > 0 ? 1.0 : -1.0;
        cols_[a].push_back({i, sigma});
        lb_[a] = 0.0;
        ub_[a] = kBig;
        stat_[s] = clamped == lb_[s] ? VStat::AtLower : VStat::AtUpper;
        x_[s] = clamped;
        basis_[i] = a;
        stat_[a] = VStat::Basic;
        x_[a] = std::abs(raw - clamped);
        binv(i, i) = sigma;  // inverse of a +-1 diagonal entry
        needs_phase1_ = true;
      }
    }
  }

  double phase1_value() {
    double v = 0.0;
    for (int j = n_struct_ + m_; j < n_total_; ++j) v += x_[j];
    return v;
  }

  // y = B^-T c_B
  std::vector<double> duals(const std::vector<double>& c) {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (int k = 0; k < m_; ++k) y[k] += cb * binv(i, k);
    }
    return y;
  }

  double reduced_cost(int j, const std::vector<double>& c,
                      const std::vector<double>& y) const {
    double d = c[j];
    for (const auto& [i, v] : cols_[j]) d -= y[i] * v;
    return d;
  }

  std::vector<double> ftran(int j) {
    std::vector<double> w(m_, 0.0);
    for (const auto& [i, v] : cols_[j])
      for (int k = 0; k < m_; ++k) w[k] += binv_[k * m_ + i] * v;
    return w;
  }

  bool refactor() {
    // Rebuild B^-1 by Gauss-Jordan with partial pivoting.
    std::vector<double> mat(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i)
      for (const auto& [r, v] : cols_[basis_[i]]) mat[r * m_ + i] = v;
    std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = -1;
      double best = tol_.pivot;
      for (int r = col; r < m_; ++r)
        if (std::abs(mat[r * m_ + col]) > best) {
          best = std::abs(mat[r * m_ + col]);
          piv = r;
        }
      if (piv < 0) return false;
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(mat[piv * m_ + k], mat[col * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[col * m_ + k]);
        }
      }
      double pv = mat[col * m_ + col];
      for (int k = 0; k < m_; ++k) {
        mat[col * m_ + k] /= pv;
        inv[col * m_ + k] /= pv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = mat[r * m_ + col];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          mat[r * m_ + k] -= f * mat[col * m_ + k];
          inv[r * m_ + k] -= f * inv[col * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    recompute_basics();
    pivots_since_refactor_ = 0;
    return true;
  }

  void recompute_basics() {
    std::vector<double> r(m_, 0.0);
    for (int i = 0; i < m_; ++i) r[i] = p_.rows[i].rhs;
    for (int j = 0; j < n_total_; ++j) {
      if (stat_[j] == VStat::Basic || x_[j] == 0.0) continue;
      for (const auto& [i, v] : cols_[j]) r[i] -= v * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double xb = 0.0;
      for (int k = 0; k < m_; ++k) xb += binv(i, k) * r[k];
      x_[basis_[i]] = xb;
    }
  }

  StepResult iterate(const std::vector<double>& c, long cap, Solution* sol) {
    while (true) {
      if (++iterations_ > cap) {
        sol->status = SolveStatus::NumericalFailure;
        sol->message = "iteration limit exceeded";
        sol->iterations = iterations_;
        return StepResult::Aborted;
      }
      if (pivots_since_refactor_ >= tol_.refactor_every) {
        if (!refactor()) {
          sol->status = SolveStatus::NumericalFailure;
          sol->message = "singular basis during refactorisation";
          return StepResult::Aborted;
        }
      }
      std::vector<double> y = duals(c);

      // Pricing: Dantzig rule, Bland's rule when fighting degeneracy.
      int enter = -1;
      double best = tol_.optimality;
      int dir = 0;
      for (int j = 0; j < n_total_; ++j) {
        if (stat_[j] == VStat::Basic || lb_[j] == ub_[j]) continue;
        double d = reduced_cost(j, c, y);
        if (stat_[j] == VStat::AtLower && d > tol_.optimality) {
          if (bland_) {
            enter = j;
            dir = +1;
            break;
          }
          if (d > best) {
            best = d;
            enter = j;
            dir = +1;
          }
        } else if (stat_[j] == VStat::AtUpper && d < -tol_.optimality) {
          if (bland_) {
            enter = j;
            dir = -1;
            break;
          }
          if (-d > best) {
            best = -d;
            enter = j;
            dir = -1;
          }
        }
      }
      if (enter < 0) return StepResult::Optimal;

      std::vector<double> w = ftran(enter);

      // Ratio test: smallest step; ties by larger pivot magnitude, then by
      // smaller variable index (pure smallest-index while in Bland mode).
      double t_flip = ub_[enter] - lb_[enter];  // may be inf
      double t = t_flip;
      int leave_pos = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        double delta = dir * w[i];  // basic i moves by -delta * t
        int bj = basis_[i];
        double cand;
        bool to_upper;
        if (delta > tol_.pivot) {
          if (!std::isfinite(lb_[bj])) continue;
          cand = (x_[bj] - lb_[bj]) / delta;
          to_upper = false;
        } else if (delta < -tol_.pivot) {
          if (!std::isfinite(ub_[bj])) continue;
          cand = (ub_[bj] - x_[bj]) / -delta;
          to_upper = true;
        } else {
          continue;
        }
        if (cand < 0.0) cand = 0.0;
        bool take;
        if (leave_pos < 0 || cand < t - 1e-9) {
          take = cand < t || leave_pos < 0;
        } else if (cand <= t + 1e-9) {
          if (bland_) {
            take = bj < basis_[leave_pos];
          } else {
            double wi = std::abs(w[i]), wl = std::abs(w[leave_pos]);
            take = wi > wl + 1e-12 ||
                   (std::abs(wi - wl) <= 1e-12 && bj < basis_[leave_pos]);
          }
        } else {
          take = false;
        }
        if (take) {
          t = std::min(t, cand);
          leave_pos = i;
          leave_to_upper = to_upper;
        }
      }

      if (!std::isfinite(t)) {
        sol->status = SolveStatus::Unbounded;
        sol->message = "objective unbounded above";
        sol->iterations = iterations_;
        return StepResult::Aborted;
      }

      degenerate_streak_ = (t <= 1e-12) ? degenerate_streak_ + 1 : 0;
      bland_ = degenerate_streak_ > 60;

      if (leave_pos < 0 || t_flip <= t) {
        // Bound flip: the entering variable crosses to its other bound.
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * w[i] * t_flip;
        x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
        stat_[enter] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
        continue;
      }

      // Pivot.
      double pivot = w[leave_pos];
      if (std::abs(pivot) < tol_.pivot) {
        if (!refactor()) {
          sol->status = SolveStatus::NumericalFailure;
          sol->message = "pivot below tolerance";
          return StepResult::Aborted;
        }
        continue;  // retry with a fresh inverse
      }
      int leave_var = basis_[leave_pos];
      for (int i = 0; i < m_; ++i)
        if (i != leave_pos) x_[basis_[i]] -= dir * w[i] * t;
      x_[enter] = (dir > 0 ? lb_[enter] : ub_[enter]) + dir * t;
      x_[leave_var] = leave_to_upper ? ub_[leave_var] : lb_[leave_var];
      stat_[leave_var] = leave_to_upper ? VStat::AtUpper : VStat::AtLower;
      stat_[enter] = VStat::Basic;
      basis_[leave_pos] = enter;

      // Product-form update of the dense inverse.
      double pr = 1.0 / pivot;
      for (int k = 0; k < m_; ++k) binv(leave_pos, k) *= pr;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_pos) continue;
        double f = w[i];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) binv(i, k) -= f * binv(leave_pos, k);
      }
      ++pivots_since_refactor_;
    }
  }

  void extract_optimal(Solution& sol) {
    std::vector<double> y = duals(cost_);
    sol.status = SolveStatus::Optimal;
    sol.x.assign(x_.begin(), x_.begin() + n_struct_);
    sol.row_duals = y;
    sol.reduced_costs.resize(n_struct_);
    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) {
      obj += cost_[j] * x_[j];
      sol.reduced_costs[j] =
          stat_[j] == VStat::Basic ? 0.0 : reduced_cost(j, cost_, y);
    }
    sol.objective = obj;
  }

  void extract_farkas(Solution& sol) {
    std::vector<double> y = duals(phase1_cost_);
    sol.status = SolveStatus::Infeasible;
    sol.farkas_rows = y;
    sol.farkas_lower.assign(n_struct_, 0.0);
    sol.farkas_upper.assign(n_struct_, 0.0);
    double value = 0.0;
    for (int i = 0; i < m_; ++i) value += y[i] * p_.rows[i].rhs;
    for (int j = 0; j < n_struct_; ++j) {
      if (stat_[j] == VStat::Basic) continue;
      double v = -reduced_cost(j, phase1_cost_, y);  // A_j^T y (c1_j = 0)
      if (stat_[j] == VStat::AtLower) {
        sol.farkas_lower[j] = std::max(0.0, v);
        value -= sol.farkas_lower[j] * lb_[j];
      } else {
        sol.farkas_upper[j] = std::max(0.0, -v);
        value += sol.farkas_upper[j] * ub_[j];
      }
    }
    sol.farkas_value = value;
    sol.message = "phase-1 infeasibility " + std::to_string(phase1_value());
  }
};

}  // namespace detail

inline Solution solve(const Problem& p, const Tolerances& tol = {}) {
  for (int j = 0; j < p.num_vars; ++j)
    if (!std::isfinite(p.lower[j]) || !std::isfinite(p.upper[j])) {
      Solution s;
      s.status = SolveStatus::NumericalFailure;
      s.message = "variable " + std::to_string(j) + " has an infinite bound";
      return s;
    }
  detail::Simplex simplex(p, tol);
  return simplex.run();
}

// ---------------------------------------------------------------------------
// certificates, used by tests and callers that want hard guarantees

inline std::vector<std::string> check_optimal(const Problem& p,
                                              const Solution& sol,
                                              double tol = 1e-7) {
  std::vector<std::string> issues;
  if (sol.status != SolveStatus::Optimal) {
    issues.push_back("status is not optimal");
    return issues;
  }
  for (int j = 0; j < p.num_vars; ++j) {
    if (sol.x[j] < p.lower[j] - tol || sol.x[j] > p.upper[j] + tol)
      issues.push_back("x" + std::to_string(j) + " out of bounds");
  }
  for (int i = 0; i < p.num_rows(); ++i) {
    double act = 0.0;
    for (const auto& [j, v] : p.rows[i].coeffs) act += v * sol.x[j];
    double slack = p.rows[i].rhs - act;
    const double y = sol.row_duals[i];
    switch (p.rows[i].sense) {
      case RowSense::LessEqual:
        if (slack < -tol) issues.push_back("row " + std::to_string(i) + " violated");
        if (y < -tol) issues.push_back("row " + std::to_string(i) + " dual sign");
        if (std::abs(y * slack) > tol * (1 + std::abs(p.rows[i].rhs)))
          issues.push_back("row " + std::to_string(i) + " complementary slackness");
        break;
      case RowSense::GreaterEqual:
        if (slack > tol) issues.push_back("row " + std::to_string(i) + " violated");
        if (y > tol) issues.push_back("row " + std::to_string(i) + " dual sign");
        if (std::abs(y * slack) > tol * (1 + std::abs(p.rows[i].rhs)))
          issues.push_back("row " + std::to_string(i) + " complementary slackness");
        break;
      case RowSense::Equal:
        if (std::abs(slack) > tol) issues.push_back("row " + std::to_string(i) + " violated");
        break;
    }
  }
  // Strong duality via the folded-bound identity.
  double dual_obj = 0.0;
  for (int i = 0; i < p.num_rows(); ++i) dual_obj += sol.row_duals[i] * p.rows[i].rhs;
  for (int j = 0; j < p.num_vars; ++j) dual_obj += sol.x[j] * sol.reduced_costs[j];
  if (std::abs(sol.objective - dual_obj) > tol * (1 + std::abs(sol.objective)))
    issues.push_back("duality gap " + std::to_string(sol.objective - dual_obj));
  return issues;
}

inline std::vector<std::string> check_farkas(const Problem& p,
                                             const Solution& sol,
                                             double tol = 1e-8) {
  std::vector<std::string> issues;
  if (sol.status != SolveStatus::Infeasible) {
    issues.push_back("status is not infeasible");
    return issues;
  }
  std::vector<double> aty(p.num_vars, 0.0);
  for (int i = 0; i < p.num_rows(); ++i) {
    double y = sol.farkas_rows[i];
    if (p.rows[i].sense == RowSense::LessEqual && y < -tol)
      issues.push_back("ray sign on <= row " + std::to_string(i));
    if (p.rows[i].sense == RowSense::GreaterEqual && y > tol)
      issues.push_back("ray sign on >= row " + std::to_string(i));
    for (const auto& [j, v] : p.rows[i].coeffs) aty[j] += y * v;
  }
  double scale = 1.0;
  for (int j = 0; j < p.num_vars; ++j) scale = std::max(scale, std::abs(aty[j]));
  for (int j = 0; j < p.num_vars; ++j) {
    double resid = aty[j] + sol.farkas_upper[j] - sol.farkas_lower[j];
    if (std::abs(resid) > tol * scale)
      issues.push_back("ray column residual at x" + std::to_string(j));
    if (sol.farkas_lower[j] < -tol || sol.farkas_upper[j] < -tol)
      issues.push_back("ray bound multiplier sign at x" + std::to_string(j));
  }
  double value = 0.0;
  for (int i = 0; i < p.num_rows(); ++i)
    value += sol.farkas_rows[i] * p.rows[i].rhs;
  for (int j = 0; j < p.num_vars; ++j)
    value += sol.farkas_upper[j] * p.upper[j] - sol.farkas_lower[j] * p.lower[j];
  if (!(value < -tol))
    issues.push_back("ray value " + std::to_string(value) + " not negative");
  return issues;
}

}  // namespace nsnm::lp
