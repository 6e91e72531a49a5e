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

// Dense two-phase primal simplex. Small and exact enough to act both as the
// engine behind the polyhedral / transport generation subproblems and as the
// reference oracle for the specialised solvers.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>

#include "aspire/core.hpp"

namespace aspire {

enum class Sense { kMaximize, kMinimize };

// optimize c'x  s.t.  a_eq x = b_eq,  a_ineq x <= b_ineq,  lower <= x <= upper.
// Empty `lower` means all zeros, empty `upper` means +inf.
struct LpProblem {
  Sense sense = Sense::kMaximize;
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_vars() const { return c.size(); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double value = 0.0;
  // Dual multipliers in the sign convention of the problem's sense: for a
  // maximization y_ineq >= 0, and reduced_cost = c - a_eq' y_eq - a_ineq' y_ineq
  // is <= 0 at variables sitting on their lower bound.
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_ineq;
  Eigen::VectorXd reduced_cost;
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-9;
  std::size_t max_pivots = 1'000'000;
  // Dantzig pricing until this many consecutive degenerate pivots, then
  // Bland's rule for the rest of the phase.
  std::size_t degenerate_switch = 32;
};

// Throws DimensionMismatch on inconsistent shapes and InvalidArgument on
// non-finite coefficients. Infeasible/unbounded problems are reported through
// the returned status.
LpSolution simplex_solve(const LpProblem& lp, const SimplexOptions& opts = {});

// Largest violation of primal feasibility, dual sign feasibility and
// complementary slackness for a reported optimal solution.
double complementary_slackness_residual(const LpProblem& lp,
                                        const LpSolution& sol);

}  // namespace aspire
