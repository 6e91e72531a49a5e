// Copyright 2026 The ASPIRE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aspire/lp.hpp"

namespace aspire {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Tableau =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// How an original variable maps onto nonnegative standard-form columns:
// x = shift + sign_a * y_a (+ sign_b * y_b for free variables).
struct VarMap {
  double shift = 0.0;
  Eigen::Index col_a = -1;
  double sign_a = 1.0;
  Eigen::Index col_b = -1;  // only for free variables, coefficient -1
};

struct StandardForm {
  std::vector<VarMap> vars;
  Eigen::Index structural = 0;
  Eigen::MatrixXd rows;  // in structural columns only
  Eigen::VectorXd rhs;
  std::vector<bool> has_slack;   // row is an inequality
  std::vector<double> row_sign;  // +1, or -1 when the row was negated
  Eigen::Index eq_rows = 0;
  Eigen::Index ineq_rows = 0;
  bool trivially_infeasible = false;
};

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string("non-finite coefficient in ") + what);
  }
}

StandardForm to_standard(const LpProblem& lp) {
  const Eigen::Index n = lp.num_vars();
  if (lp.a_eq.rows() != lp.b_eq.size() ||
      (lp.a_eq.rows() > 0 && lp.a_eq.cols() != n)) {
    throw DimensionMismatch("equality block has inconsistent dimensions");
  }
  if (lp.a_ineq.rows() != lp.b_ineq.size() ||
      (lp.a_ineq.rows() > 0 && lp.a_ineq.cols() != n)) {
    throw DimensionMismatch("inequality block has inconsistent dimensions");
  }
  if ((lp.lower.size() != 0 && lp.lower.size() != n) ||
      (lp.upper.size() != 0 && lp.upper.size() != n)) {
    throw DimensionMismatch("bound vectors must match the variable count");
  }
  check_finite(lp.c, "objective");
  check_finite(lp.a_eq, "equality rows");
  check_finite(lp.b_eq, "equality rhs");
  check_finite(lp.a_ineq, "inequality rows");
  check_finite(lp.b_ineq, "inequality rhs");

  StandardForm sf;
  sf.vars.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<Eigen::Index, double>> bound_rows;  // (col, ub)
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = lp.lower.size() ? lp.lower(j) : 0.0;
    const double up = lp.upper.size() ? lp.upper(j) : kInf;
    if (std::isnan(lo) || std::isnan(up) || lo == kInf || up == -kInf) {
      throw InvalidArgument("invalid variable bound");
    }
    VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
    if (lo > up) sf.trivially_infeasible = true;
    if (std::isfinite(lo)) {
      vm.shift = lo;
      vm.col_a = col++;
      if (std::isfinite(up)) bound_rows.emplace_back(vm.col_a, up - lo);
    } else if (std::isfinite(up)) {
      vm.shift = up;
      vm.col_a = col++;
      vm.sign_a = -1.0;
    } else {
      vm.col_a = col++;
      vm.col_b = col++;
    }
  }
  sf.structural = col;

  sf.eq_rows = lp.a_eq.rows();
  sf.ineq_rows = lp.a_ineq.rows();
  const Eigen::Index m =
      sf.eq_rows + sf.ineq_rows + static_cast<Eigen::Index>(bound_rows.size());
  sf.rows = Eigen::MatrixXd::Zero(m, sf.structural);
  sf.rhs = Eigen::VectorXd::Zero(m);
  sf.has_slack.assign(static_cast<std::size_t>(m), false);
  sf.row_sign.assign(static_cast<std::size_t>(m), 1.0);

  auto emit = [&](Eigen::Index r, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  double b) {
    double rhs = b;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double aj = a(j);
      if (aj == 0.0) continue;
      const VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
      rhs -= aj * vm.shift;
      sf.rows(r, vm.col_a) += aj * vm.sign_a;
      if (vm.col_b >= 0) sf.rows(r, vm.col_b) -= aj;
    }
    sf.rhs(r) = rhs;
  };
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sf.eq_rows; ++i, ++r) {
    emit(r, lp.a_eq.row(i), lp.b_eq(i));
  }
  for (Eigen::Index i = 0; i < sf.ineq_rows; ++i, ++r) {
    emit(r, lp.a_ineq.row(i), lp.b_ineq(i));
    sf.has_slack[static_cast<std::size_t>(r)] = true;
  }
  for (const auto& [c, ub] : bound_rows) {
    sf.rows(r, c) = 1.0;
    sf.rhs(r) = ub;
    sf.has_slack[static_cast<std::size_t>(r)] = true;
    ++r;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sf.rhs(i) < 0.0) {
      sf.rows.row(i) *= -1.0;
      sf.rhs(i) *= -1.0;
      sf.row_sign[static_cast<std::size_t>(i)] = -1.0;
    }
  }
  return sf;
}

class TableauSolver {
 public:
  TableauSolver(const StandardForm& sf, const SimplexOptions& opts)
      : opts_(opts), m_(sf.rows.rows()), nstruct_(sf.structural) {
    // Columns: structural | one slack per inequality row | one "initial
    // basis" column per row that has no usable slack (artificial).
    slack_col_.assign(static_cast<std::size_t>(m_), -1);
    init_col_.assign(static_cast<std::size_t>(m_), -1);
    Eigen::Index col = nstruct_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (sf.has_slack[static_cast<std::size_t>(i)]) {
        slack_col_[static_cast<std::size_t>(i)] = col++;
      }
    }
    first_art_ = col;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const bool slack_basic = sf.has_slack[static_cast<std::size_t>(i)] &&
                               sf.row_sign[static_cast<std::size_t>(i)] > 0.0;
      if (slack_basic) {
        init_col_[static_cast<std::size_t>(i)] =
            slack_col_[static_cast<std::size_t>(i)];
      } else {
        init_col_[static_cast<std::size_t>(i)] = col++;
      }
    }
    ncols_ = col;
    t_ = Tableau::Zero(m_ + 1, ncols_ + 1);
    t_.block(0, 0, m_, nstruct_) = sf.rows;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const auto si = static_cast<std::size_t>(i);
      if (slack_col_[si] >= 0) t_(i, slack_col_[si]) = sf.row_sign[si];
      t_(i, init_col_[si]) = 1.0;
      t_(i, ncols_) = sf.rhs(i);
    }
    basis_ = init_col_;
  }

  bool is_artificial(Eigen::Index c) const { return c >= first_art_; }

  // Phase one: minimise the sum of artificials. Returns the residual
  // infeasibility.
  double phase_one() {
    t_.row(m_).setZero();
    bool any = false;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (is_artificial(basis_[static_cast<std::size_t>(i)])) {
        t_.row(m_) -= t_.row(i);
        any = true;
      }
    }
    if (!any) return 0.0;
    for (Eigen::Index c = first_art_; c < ncols_; ++c) t_(m_, c) = 0.0;
    run(/*allow_artificial=*/true);
    return -t_(m_, ncols_);
  }

  // Pivots remaining zero-level artificials out of the basis where possible.
  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Eigen::Index best = -1;
      double best_abs = opts_.pivot_tol;
      for (Eigen::Index c = 0; c < first_art_; ++c) {
        const double a = std::abs(t_(i, c));
        if (a > best_abs) {
          best_abs = a;
          best = c;
        }
      }
      // A row without any usable entry is redundant; its artificial stays
      // basic at level zero and never moves again.
      if (best >= 0) pivot(i, best);
    }
  }

  // Returns false when the objective is unbounded.
  bool phase_two(const Eigen::VectorXd& cost) {
    t_.row(m_).setZero();
    t_.block(m_, 0, 1, nstruct_) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      const double cb = b < nstruct_ ? cost(b) : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
    return run(/*allow_artificial=*/false);
  }

  Eigen::VectorXd structural_values() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nstruct_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < nstruct_) y(b) = std::max(0.0, t_(i, ncols_));
    }
    return y;
  }

  // Simplex multipliers of the internal (minimisation, sign-normalised) rows.
  Eigen::VectorXd row_multipliers() const {
    Eigen::VectorXd pi(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      pi(i) = -t_(m_, init_col_[static_cast<std::size_t>(i)]);
    }
    return pi;
  }

  std::size_t pivots() const { return pivots_; }

 private:
  bool run(bool allow_artificial) {
    const Eigen::Index last = allow_artificial ? ncols_ : first_art_;
    bool bland = false;
    std::size_t degenerate = 0;
    while (pivots_ < opts_.max_pivots) {
      Eigen::Index enter = -1;
      double best = -opts_.pivot_tol;
      for (Eigen::Index c = 0; c < last; ++c) {
        const double d = t_(m_, c);
        if (bland) {
          if (d < -opts_.pivot_tol) {
            enter = c;
            break;
          }
        } else if (d < best) {
          best = d;
          enter = c;
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double ratio = kInf;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= opts_.pivot_tol) continue;
        const double r = t_(i, ncols_) / a;
        if (leave < 0 || r < ratio - 1e-13 * std::max(1.0, std::abs(ratio))) {
          ratio = r;
          leave = i;
        } else if (r <= ratio + 1e-13 * std::max(1.0, std::abs(ratio))) {
          const auto bi = basis_[static_cast<std::size_t>(i)];
          const auto bl = basis_[static_cast<std::size_t>(leave)];
          const bool take = bland ? bi < bl : a > t_(leave, enter);
          if (take) {
            ratio = std::min(ratio, r);
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      if (ratio <= opts_.feasibility_tol * 1e-3) {
        if (++degenerate >= opts_.degenerate_switch) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
    }
    throw NumericalError("simplex pivot limit reached");
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    t_(r, c) = 1.0;
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f == 0.0) continue;
      t_.row(i) -= f * t_.row(r);
      t_(i, c) = 0.0;
      if (i < m_ && t_(i, ncols_) < 0.0 && t_(i, ncols_) > -1e-12) {
        t_(i, ncols_) = 0.0;
      }
    }
    basis_[static_cast<std::size_t>(r)] = c;
    ++pivots_;
  }

  SimplexOptions opts_;
  Eigen::Index m_;
  Eigen::Index nstruct_;
  Eigen::Index first_art_ = 0;
  Eigen::Index ncols_ = 0;
  std::vector<Eigen::Index> slack_col_;
  std::vector<Eigen::Index> init_col_;
  std::vector<Eigen::Index> basis_;
  Tableau t_;
  std::size_t pivots_ = 0;
};

}  // namespace

LpSolution simplex_solve(const LpProblem& lp, const SimplexOptions& opts) {
  const StandardForm sf = to_standard(lp);
  LpSolution sol;
  const Eigen::Index n = lp.num_vars();
  if (sf.trivially_infeasible) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }

  // Internal problem is a minimisation over the structural columns.
  const double sense = lp.sense == Sense::kMaximize ? -1.0 : 1.0;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(sf.structural);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
    cost(vm.col_a) += sense * lp.c(j) * vm.sign_a;
    if (vm.col_b >= 0) cost(vm.col_b) -= sense * lp.c(j);
  }

  TableauSolver solver(sf, opts);
  const double infeas = solver.phase_one();
  const double scale = std::max(1.0, sf.rhs.size() ? sf.rhs.cwiseAbs().maxCoeff() : 0.0);
  if (infeas > opts.feasibility_tol * scale) {
    sol.status = LpStatus::kInfeasible;
    sol.pivots = solver.pivots();
    return sol;
  }
  solver.drive_out_artificials();
  if (!solver.phase_two(cost)) {
    sol.status = LpStatus::kUnbounded;
    sol.pivots = solver.pivots();
    return sol;
  }

  const Eigen::VectorXd y = solver.structural_values();
  sol.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& vm = sf.vars[static_cast<std::size_t>(j)];
    double v = vm.shift + vm.sign_a * y(vm.col_a);
    if (vm.col_b >= 0) v -= y(vm.col_b);
    sol.x(j) = v;
  }
  sol.value = lp.c.dot(sol.x);

  // Multipliers back in the caller's rows and sense.
  const Eigen::VectorXd pi = solver.row_multipliers();
  sol.y_eq.resize(sf.eq_rows);
  sol.y_ineq.resize(sf.ineq_rows);
  for (Eigen::Index i = 0; i < sf.eq_rows; ++i) {
    sol.y_eq(i) = sense * sf.row_sign[static_cast<std::size_t>(i)] * pi(i);
  }
  for (Eigen::Index i = 0; i < sf.ineq_rows; ++i) {
    const Eigen::Index r = sf.eq_rows + i;
    sol.y_ineq(i) = sense * sf.row_sign[static_cast<std::size_t>(r)] * pi(r);
  }
  sol.reduced_cost = lp.c;
  if (sf.eq_rows > 0) sol.reduced_cost -= lp.a_eq.transpose() * sol.y_eq;
  if (sf.ineq_rows > 0) sol.reduced_cost -= lp.a_ineq.transpose() * sol.y_ineq;
  sol.status = LpStatus::kOptimal;
  sol.pivots = solver.pivots();
  return sol;
}

double complementary_slackness_residual(const LpProblem& lp,
                                        const LpSolution& sol) {
  if (sol.status != LpStatus::kOptimal) return kInf;
  const Eigen::Index n = lp.num_vars();
  const double s = lp.sense == Sense::kMaximize ? 1.0 : -1.0;
  double r = 0.0;
  if (lp.a_eq.rows() > 0) {
    r = std::max(r, (lp.a_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff());
  }
  if (lp.a_ineq.rows() > 0) {
    const Eigen::VectorXd slack = lp.b_ineq - lp.a_ineq * sol.x;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      r = std::max(r, -slack(i));
      r = std::max(r, -s * sol.y_ineq(i));
      r = std::max(r, std::abs(sol.y_ineq(i) * slack(i)));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = lp.lower.size() ? lp.lower(j) : 0.0;
    const double up = lp.upper.size() ? lp.upper(j) : kInf;
    const double x = sol.x(j);
    r = std::max(r, lo - x);
    r = std::max(r, x - up);
    const double d = s * sol.reduced_cost(j);
    if (d > 0.0) {
      r = std::max(r, std::isfinite(up) ? d * (up - x) : d);
    } else if (d < 0.0) {
      r = std::max(r, std::isfinite(lo) ? -d * (x - lo) : -d);
    }
  }
  return r;
}

}  // namespace aspire
