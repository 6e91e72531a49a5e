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

// Augmented Lagrangian
//   L_p = h + sum_l lambda_l (sum_j (p_bar + a_lj) f_j - h)
//         + sum_j phi_j'(z - w_j) + sum_j kappa1/2 ||z - w_j||^2
// and its regularized form, which subtracts c1/2 lambda_l^2 and
// c2/2 ||phi_j||^2. Gradients are analytic; the projected steps are applied
// in place.

#pragma once

#include <span>
#include <vector>

#include "aspire/core.hpp"
#include "aspire/ease.hpp"

namespace aspire {

struct LagrangianContext {
  const ProblemState& state;
  const CuttingPlaneSet& planes;
  const HyperParams& hp;
  const Vec& f;               // per-worker losses at state.w
  const std::vector<Vec>& g;  // per-worker gradients at state.w
  double p_bar;
};

// Throws DimensionMismatch when f, g, planes and state disagree.
void check_context(const LagrangianContext& ctx);

double eval_lp(const LagrangianContext& ctx);
double eval_lp_reg(const LagrangianContext& ctx, double c1, double c2);

Vec grad_w(const LagrangianContext& ctx, std::size_t j);
Vec grad_z(const LagrangianContext& ctx);
double grad_h(const LagrangianContext& ctx);
// Ascent directions; pass c = 0 for the unregularized gradient.
double grad_lambda(const LagrangianContext& ctx, std::size_t l, double c1);
Vec grad_phi(const LagrangianContext& ctx, std::size_t j, double c2);

// Worker-side primal step for one worker given the (possibly stale) plane
// weight sum_l lambda_l (p_bar + a_lj) and consensus z.
Vec local_w_step(std::span<const double> w, std::span<const double> g,
                 std::span<const double> phi, std::span<const double> z,
                 double plane_weight, double kappa1, double step,
                 double radius);

// In-place projected updates. Each reads the freshest state, so calling them
// in the order w, z, h, lambda, phi gives the Gauss-Seidel sweep.
void step_w(ProblemState& state, const CuttingPlaneSet& planes,
            const HyperParams& hp, const Vec& f, const std::vector<Vec>& g,
            double p_bar, std::span<const std::size_t> active, double step);
void step_z(ProblemState& state, const HyperParams& hp, double step);
void step_h(ProblemState& state, const CuttingPlaneSet& planes,
            const HyperParams& hp, double step);
void step_lambda(CuttingPlaneSet& planes, const ProblemState& state,
                 const HyperParams& hp, const Vec& f, double p_bar, double c1);
void step_phi(ProblemState& state, const HyperParams& hp,
              std::span<const std::size_t> active, double c2);

}  // namespace aspire
