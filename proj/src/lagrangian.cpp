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

#include "aspire/lagrangian.hpp"

namespace aspire {

namespace {

double plane_value(const CuttingPlane& plane, const Vec& f, double p_bar) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += (p_bar + plane.a[j]) * f[j];
  return s;
}

double squared_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

void check_context(const LagrangianContext& ctx) {
  const std::size_t n = ctx.state.workers();
  const std::size_t p = ctx.state.dim();
  if (ctx.f.size() != n || ctx.g.size() != n || ctx.state.phi.size() != n) {
    throw DimensionMismatch("losses, gradients and duals must have N entries");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (ctx.g[j].size() != p || ctx.state.w[j].size() != p ||
        ctx.state.phi[j].size() != p) {
      throw DimensionMismatch("worker vectors must have the model dimension");
    }
  }
  for (const auto& plane : ctx.planes.planes()) {
    if (plane.a.size() != n) {
      throw DimensionMismatch("cutting plane length must equal N");
    }
  }
}

double eval_lp(const LagrangianContext& ctx) {
  check_context(ctx);
  const auto& s = ctx.state;
  double value = s.h;
  for (const auto& plane : ctx.planes.planes()) {
    value += plane.dual * (plane_value(plane, ctx.f, ctx.p_bar) - s.h);
  }
  for (std::size_t j = 0; j < s.workers(); ++j) {
    for (std::size_t i = 0; i < s.dim(); ++i) {
      const double d = s.z[i] - s.w[j][i];
      value += s.phi[j][i] * d + 0.5 * ctx.hp.kappa1 * d * d;
    }
  }
  return value;
}

double eval_lp_reg(const LagrangianContext& ctx, double c1, double c2) {
  double value = eval_lp(ctx);
  for (const auto& plane : ctx.planes.planes()) {
    value -= 0.5 * c1 * plane.dual * plane.dual;
  }
  for (const auto& phi : ctx.state.phi) value -= 0.5 * c2 * squared_norm(phi);
  return value;
}

Vec grad_w(const LagrangianContext& ctx, std::size_t j) {
  const auto& s = ctx.state;
  const double weight = ctx.planes.weight(j, ctx.p_bar);
  Vec out(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    out[i] = weight * ctx.g[j][i] - s.phi[j][i] -
             ctx.hp.kappa1 * (s.z[i] - s.w[j][i]);
  }
  return out;
}

Vec grad_z(const LagrangianContext& ctx) {
  const auto& s = ctx.state;
  Vec out(s.dim(), 0.0);
  for (std::size_t j = 0; j < s.workers(); ++j) {
    for (std::size_t i = 0; i < s.dim(); ++i) {
      out[i] += s.phi[j][i] + ctx.hp.kappa1 * (s.z[i] - s.w[j][i]);
    }
  }
  return out;
}

double grad_h(const LagrangianContext& ctx) {
  double sum = 0.0;
  for (const auto& plane : ctx.planes.planes()) sum += plane.dual;
  return 1.0 - sum;
}

double grad_lambda(const LagrangianContext& ctx, std::size_t l, double c1) {
  const auto& plane = ctx.planes[l];
  return plane_value(plane, ctx.f, ctx.p_bar) - ctx.state.h - c1 * plane.dual;
}

Vec grad_phi(const LagrangianContext& ctx, std::size_t j, double c2) {
  const auto& s = ctx.state;
  Vec out(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    out[i] = (s.z[i] - s.w[j][i]) - c2 * s.phi[j][i];
  }
  return out;
}

Vec local_w_step(std::span<const double> w, std::span<const double> g,
                 std::span<const double> phi, std::span<const double> z,
                 double plane_weight, double kappa1, double step,
                 double radius) {
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double grad = plane_weight * g[i] - phi[i] - kappa1 * (z[i] - w[i]);
    out[i] = w[i] - step * grad;
  }
  project_box_inplace(out, radius);
  return out;
}

void step_w(ProblemState& state, const CuttingPlaneSet& planes,
            const HyperParams& hp, const Vec& f, const std::vector<Vec>& g,
            double p_bar, std::span<const std::size_t> active, double step) {
  check_context({state, planes, hp, f, g, p_bar});
  for (std::size_t j : active) {
    if (j >= state.workers()) throw InvalidArgument("worker index out of range");
    state.w[j] = local_w_step(state.w[j], g[j], state.phi[j], state.z,
                              planes.weight(j, p_bar), hp.kappa1, step,
                              hp.radii.w);
  }
}

void step_z(ProblemState& state, const HyperParams& hp, double step) {
  Vec grad(state.dim(), 0.0);
  for (std::size_t j = 0; j < state.workers(); ++j) {
    for (std::size_t i = 0; i < state.dim(); ++i) {
      grad[i] += state.phi[j][i] + hp.kappa1 * (state.z[i] - state.w[j][i]);
    }
  }
  for (std::size_t i = 0; i < state.dim(); ++i) state.z[i] -= step * grad[i];
  project_box_inplace(state.z, hp.radii.w);
}

void step_h(ProblemState& state, const CuttingPlaneSet& planes,
            const HyperParams& hp, double step) {
  double sum = 0.0;
  for (const auto& plane : planes.planes()) sum += plane.dual;
  state.h = project_interval(state.h - step * (1.0 - sum), hp.radii.h);
}

void step_lambda(CuttingPlaneSet& planes, const ProblemState& state,
                 const HyperParams& hp, const Vec& f, double p_bar, double c1) {
  for (std::size_t l = 0; l < planes.size(); ++l) {
    const auto& plane = planes[l];
    const double grad = plane_value(plane, f, p_bar) - state.h - c1 * plane.dual;
    planes.set_dual(l, project_interval(plane.dual + hp.rho1 * grad,
                                        hp.radii.lambda));
  }
}

void step_phi(ProblemState& state, const HyperParams& hp,
              std::span<const std::size_t> active, double c2) {
  for (std::size_t j : active) {
    if (j >= state.workers()) throw InvalidArgument("worker index out of range");
    auto& phi = state.phi[j];
    for (std::size_t i = 0; i < state.dim(); ++i) {
      phi[i] += hp.rho2 * ((state.z[i] - state.w[j][i]) - c2 * phi[i]);
    }
    project_box_inplace(phi, hp.radii.phi);
  }
}

}  // namespace aspire
