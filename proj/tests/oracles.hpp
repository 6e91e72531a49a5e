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

// Reference implementations used only by the tests. Each one avoids the
// library routine it checks: brute force, a different formulation, or finite
// differences.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "aspire/core.hpp"
#include "aspire/ease.hpp"
#include "aspire/lagrangian.hpp"
#include "aspire/lp.hpp"
#include "aspire/objectives.hpp"
#include "aspire/random.hpp"
#include "aspire/uncertainty.hpp"

namespace aspire::oracle {

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double sum(const Vec& a) { return std::accumulate(a.begin(), a.end(), 0.0); }

// ||a - b|| / max(||b||, floor).
inline double rel_err(const Vec& a, const Vec& b, double floor = 1e-12) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d) / std::max(norm(b), floor);
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

inline Vec random_simplex(Rng& rng, std::size_t n, double min_mass = 0.0) {
  Vec q(n);
  for (double& x : q) x = min_mass + rng.uniform();
  const double s = sum(q);
  for (double& x : q) x /= s;
  return q;
}

// ---------------------------------------------------------------------------
// Random instances.

inline Vec random_losses(Rng& rng, std::size_t n) {
  Vec f(n);
  for (double& x : f) x = rng.uniform();
  return f;
}

inline AmbiguitySpec random_cdnorm(Rng& rng, std::size_t n) {
  Vec q = random_simplex(rng, n, 0.1);
  Vec caps(n);
  for (double& x : caps) x = rng.uniform(0.05, 0.5);
  return AmbiguitySpec::cdnorm(std::move(q), std::move(caps),
                               rng.uniform(0.0, static_cast<double>(n)));
}

inline AmbiguitySpec random_box(Rng& rng, std::size_t n) {
  const Vec p0 = random_simplex(rng, n, 0.1);
  Vec lo(n), hi(n);
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = p0[j] * rng.uniform();
    hi[j] = std::min(1.0, p0[j] + rng.uniform(0.0, 0.5));
  }
  return AmbiguitySpec::box(std::move(lo), std::move(hi));
}

// Rows keep the uniform distribution strictly feasible.
inline AmbiguitySpec random_polyhedron(Rng& rng, std::size_t n, std::size_t rows) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  Eigen::VectorXd c(static_cast<Eigen::Index>(rows));
  const Eigen::VectorXd center =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) d(r, j) = rng.uniform(-1.0, 1.0);
    c(r) = d.row(r).dot(center) + rng.uniform(0.01, 0.3);
  }
  return AmbiguitySpec::polyhedron(std::move(d), std::move(c));
}

inline AmbiguitySpec random_kl(Rng& rng, std::size_t n) {
  return AmbiguitySpec::kl(random_simplex(rng, n, 0.1), rng.uniform(0.01, 1.5));
}

inline AmbiguitySpec random_wasserstein(Rng& rng, std::size_t n) {
  return AmbiguitySpec::wasserstein1(random_simplex(rng, n, 0.1),
                                     rng.uniform(0.0, 1.5));
}

// ---------------------------------------------------------------------------
// Vertex enumeration.

// Maximizes c'x over {E x = e, G x <= g} by trying every basis made of the
// equality rows plus n - rank(E) inequality rows. The region must be bounded.
// Returns -inf when no feasible vertex exists.
inline double vertex_enumeration(const Eigen::VectorXd& c,
                                 const Eigen::MatrixXd& e_rows,
                                 const Eigen::VectorXd& e_rhs,
                                 const Eigen::MatrixXd& g_rows,
                                 const Eigen::VectorXd& g_rhs,
                                 Eigen::VectorXd* argmax = nullptr,
                                 double tol = 1e-9) {
  const Eigen::Index n = c.size();
  const Eigen::Index me = e_rows.rows();
  const Eigen::Index mg = g_rows.rows();
  const Eigen::Index pick = n - me;
  double best = -std::numeric_limits<double>::infinity();
  if (pick < 0 || pick > mg) return best;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(pick));
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd b(n);
  while (true) {
    a.topRows(me) = e_rows;
    b.head(me) = e_rhs;
    for (Eigen::Index k = 0; k < pick; ++k) {
      a.row(me + k) = g_rows.row(idx[static_cast<std::size_t>(k)]);
      b(me + k) = g_rhs(idx[static_cast<std::size_t>(k)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      bool ok = (a * x - b).cwiseAbs().maxCoeff() <= 1e-9;
      if (ok && me > 0) ok = (e_rows * x - e_rhs).cwiseAbs().maxCoeff() <= tol;
      if (ok && mg > 0) ok = (g_rows * x - g_rhs).maxCoeff() <= tol;
      if (ok && c.dot(x) > best) {
        best = c.dot(x);
        if (argmax) *argmax = x;
      }
    }
    // Next combination.
    Eigen::Index k = pick - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == mg - pick + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (Eigen::Index r = k + 1; r < pick; ++r) {
      idx[static_cast<std::size_t>(r)] = idx[static_cast<std::size_t>(r - 1)] + 1;
    }
  }
  return best;
}

// Polyhedral set {D p <= c, p >= 0, 1'p = 1} by vertex enumeration.
// Returns sum_j (p_j - p_bar) f_j at the best vertex.
inline double polyhedron_value(const Eigen::MatrixXd& d_rows,
                               const Eigen::VectorXd& d_rhs, const Vec& f,
                               double p_bar) {
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::MatrixXd g(d_rows.rows() + n, n);
  Eigen::VectorXd h(d_rows.rows() + n);
  if (d_rows.rows() > 0) {
    g.topRows(d_rows.rows()) = d_rows;
    h.head(d_rows.rows()) = d_rhs;
  }
  g.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  h.tail(n).setZero();
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  const double best = vertex_enumeration(c, Eigen::MatrixXd::Ones(1, n),
                                         Eigen::VectorXd::Ones(1), g, h);
  return best - p_bar * sum(f);
}

// ---------------------------------------------------------------------------
// LP reformulations solved by the dense simplex.

// CD-norm set with split deviations p - q = u+ - u-:
//   u+ + u- <= p_tilde,  sum (u+ + u-) / p_tilde <= Gamma,  1'p = 1,  p >= 0.
inline double cdnorm_lp_value(const Vec& q, const Vec& p_tilde, double budget,
                              const Vec& f, double p_bar) {
  const auto n = static_cast<Eigen::Index>(q.size());
  LpProblem lp;
  lp.sense = Sense::kMaximize;
  lp.c = Eigen::VectorXd::Zero(3 * n);
  for (Eigen::Index j = 0; j < n; ++j) lp.c(j) = f[static_cast<std::size_t>(j)];
  lp.a_eq = Eigen::MatrixXd::Zero(n + 1, 3 * n);
  lp.b_eq = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    lp.a_eq(j, j) = 1.0;
    lp.a_eq(j, n + j) = -1.0;
    lp.a_eq(j, 2 * n + j) = 1.0;
    lp.b_eq(j) = q[static_cast<std::size_t>(j)];
    lp.a_eq(n, j) = 1.0;
  }
  lp.b_eq(n) = 1.0;
  lp.a_ineq = Eigen::MatrixXd::Zero(n + 1, 3 * n);
  lp.b_ineq = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cap = p_tilde[static_cast<std::size_t>(j)];
    lp.a_ineq(j, n + j) = 1.0;
    lp.a_ineq(j, 2 * n + j) = 1.0;
    lp.b_ineq(j) = cap;
    lp.a_ineq(n, n + j) = 1.0 / cap;
    lp.a_ineq(n, 2 * n + j) = 1.0 / cap;
  }
  lp.b_ineq(n) = budget;
  const LpSolution sol = simplex_solve(lp);
  if (sol.status != LpStatus::kOptimal) return std::nan("");
  return sol.value - p_bar * sum(f);
}

inline double box_lp_value(const Vec& lower, const Vec& upper, const Vec& f,
                           double p_bar) {
  const auto n = static_cast<Eigen::Index>(f.size());
  LpProblem lp;
  lp.sense = Sense::kMaximize;
  lp.c = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
  lp.a_eq = Eigen::MatrixXd::Ones(1, n);
  lp.b_eq = Eigen::VectorXd::Ones(1);
  lp.lower = Eigen::Map<const Eigen::VectorXd>(lower.data(), n);
  lp.upper = Eigen::Map<const Eigen::VectorXd>(upper.data(), n);
  const LpSolution sol = simplex_solve(lp);
  if (sol.status != LpStatus::kOptimal) return std::nan("");
  return sol.value - p_bar * sum(f);
}

// ---------------------------------------------------------------------------
// KL ball: max f'p s.t. KL(p || q) <= beta, via the one-dimensional dual
//   min_{eta > 0} eta beta + eta log sum_j q_j exp(f_j / eta)
// minimized by golden section in log eta. When the prior mass on the argmax
// set already satisfies -log Q(argmax) <= beta the maximum is max f.
inline double kl_dual_value(const Vec& q, const Vec& f, double beta,
                            double p_bar) {
  const double fmax = *std::max_element(f.begin(), f.end());
  double q_top = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (f[j] == fmax) q_top += q[j];
  }
  double best;
  if (-std::log(q_top) <= beta) {
    best = fmax;
  } else {
    auto dual = [&](double log_eta) {
      const double eta = std::exp(log_eta);
      double s = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j) {
        s += q[j] * std::exp((f[j] - fmax) / eta);
      }
      return eta * beta + fmax + eta * std::log(s);
    };
    double lo = std::log(1e-10);
    double hi = std::log(1e10);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = dual(x1);
    double f2 = dual(x2);
    while (hi - lo > 1e-12) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        f1 = dual(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        f2 = dual(x2);
      }
    }
    best = std::min(f1, f2);
  }
  return best - p_bar * sum(f);
}

// ---------------------------------------------------------------------------
// Wasserstein-1 under |i - j| cost, N = 3.

// Min-cost transport on a line: the cost of moving mass between neighbours
// is the absolute cumulative imbalance.
inline double line_transport_cost(const Vec& p, const Vec& q) {
  double carry = 0.0;
  double cost = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    carry += p[k] - q[k];
    cost += std::abs(carry);
  }
  return cost;
}

// Best value over the grid {(i, j, k) / steps}. Points are admitted only
// when the transport cost is within beta.
inline double wasserstein3_grid_value(const Vec& q, const Vec& f, double beta,
                                      double p_bar, int steps = 1000) {
  double best = -std::numeric_limits<double>::infinity();
  const double h = 1.0 / steps;
  Vec p(3);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      p[0] = i * h;
      p[1] = j * h;
      p[2] = (steps - i - j) * h;
      if (line_transport_cost(p, q) <= beta + 1e-12) best = std::max(best, dot(p, f));
    }
  }
  return best - p_bar * sum(f);
}

// ---------------------------------------------------------------------------
// Ellipsoid {||p - q||^2 <= beta} with Q = I and N = 3, on a polar grid of
// the simplex slice. The radial grid always includes the boundary.
inline double ellipsoid3_grid_value(const Vec& q, const Vec& f, double beta,
                                    double p_bar, double res = 1e-3) {
  const double s2 = std::sqrt(2.0);
  const double s6 = std::sqrt(6.0);
  const Vec u1 = {1.0 / s2, -1.0 / s2, 0.0};
  const Vec u2 = {1.0 / s6, 1.0 / s6, -2.0 / s6};
  const double r_max = std::sqrt(beta);
  const int radial = static_cast<int>(std::ceil(r_max / res));
  const int angular = static_cast<int>(std::ceil(2.0 * M_PI / res));
  double best = dot(q, f);
  Vec p(3);
  for (int a = 0; a < angular; ++a) {
    const double th = 2.0 * M_PI * a / angular;
    const double c = std::cos(th);
    const double s = std::sin(th);
    for (int k = 1; k <= radial; ++k) {
      const double r = r_max * k / radial;
      bool ok = true;
      for (std::size_t j = 0; j < 3; ++j) {
        p[j] = q[j] + r * (c * u1[j] + s * u2[j]);
        ok = ok && p[j] >= 0.0;
      }
      if (ok) best = std::max(best, dot(p, f));
    }
  }
  return best - p_bar * sum(f);
}

// ---------------------------------------------------------------------------
// Lagrangian, written out term by term from the definition, with the losses
// recomputed from the objectives at the current w.

struct PlaneData {
  std::vector<Vec> a;
  Vec lambda;
};

inline PlaneData plane_data(const CuttingPlaneSet& set) {
  PlaneData d;
  for (const auto& pl : set.planes()) {
    d.a.push_back(pl.a);
    d.lambda.push_back(pl.dual);
  }
  return d;
}

inline double lagrangian_reg(const ProblemState& s, const PlaneData& planes,
                             const std::vector<LocalObjective>& objs,
                             double p_bar, double kappa1, double c1, double c2) {
  const std::size_t n = s.w.size();
  Vec f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = objs[j].loss(s.w[j]);
  double total = s.h;
  for (std::size_t l = 0; l < planes.a.size(); ++l) {
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) weighted += (p_bar + planes.a[l][j]) * f[j];
    total += planes.lambda[l] * (weighted - s.h);
    total -= 0.5 * c1 * planes.lambda[l] * planes.lambda[l];
  }
  for (std::size_t j = 0; j < n; ++j) {
    double lin = 0.0;
    double quad = 0.0;
    double reg = 0.0;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      const double d = s.z[i] - s.w[j][i];
      lin += s.phi[j][i] * d;
      quad += d * d;
      reg += s.phi[j][i] * s.phi[j][i];
    }
    total += lin + 0.5 * kappa1 * quad - 0.5 * c2 * reg;
  }
  return total;
}

// Central differences of `fn` around `x` (modified in place, then restored).
inline Vec central_diff(Vec& x, const std::function<double()>& fn,
                        double step = 1e-6) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = fn();
    x[i] = keep - step;
    const double down = fn();
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline double central_diff(double& x, const std::function<double()>& fn,
                           double step = 1e-6) {
  const double keep = x;
  x = keep + step;
  const double up = fn();
  x = keep - step;
  const double down = fn();
  x = keep;
  return (up - down) / (2.0 * step);
}

// Finite-difference gradients of the regularized Lagrangian, every block.
struct FdGradients {
  std::vector<Vec> w;
  Vec z;
  double h = 0.0;
  Vec lambda;
  std::vector<Vec> phi;
};

inline FdGradients fd_gradients(ProblemState s, PlaneData planes,
                                const std::vector<LocalObjective>& objs,
                                double p_bar, double kappa1, double c1,
                                double c2, double step = 1e-6) {
  FdGradients out;
  auto fn = [&] { return lagrangian_reg(s, planes, objs, p_bar, kappa1, c1, c2); };
  for (auto& w : s.w) out.w.push_back(central_diff(w, fn, step));
  out.z = central_diff(s.z, fn, step);
  out.h = central_diff(s.h, fn, step);
  out.lambda = central_diff(planes.lambda, fn, step);
  for (auto& phi : s.phi) out.phi.push_back(central_diff(phi, fn, step));
  return out;
}

// Stationarity gap rebuilt from finite-difference gradients of the
// unregularized Lagrangian and the box projections.
inline double fd_gap(const ProblemState& s, const CuttingPlaneSet& set,
                     const std::vector<LocalObjective>& objs, double p_bar,
                     const HyperParams& hp, double alpha_w, double eta_z,
                     double eta_h, double rho1, double rho2) {
  const FdGradients g = fd_gradients(s, plane_data(set), objs, p_bar, hp.kappa1, 0.0, 0.0);
  const Radii& r = hp.radii;
  double sq = 0.0;
  auto primal = [&](const Vec& x, const Vec& grad, double step, double radius) {
    Vec moved(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) moved[i] = x[i] - step * grad[i];
    moved = project_box(moved, radius);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = (x[i] - moved[i]) / step;
      sq += d * d;
    }
  };
  for (std::size_t j = 0; j < s.w.size(); ++j) primal(s.w[j], g.w[j], alpha_w, r.w);
  primal(s.z, g.z, eta_z, r.w);
  {
    const double moved = project_interval(s.h - eta_h * g.h, r.h);
    sq += std::pow((s.h - moved) / eta_h, 2);
  }
  for (std::size_t l = 0; l < set.size(); ++l) {
    const double lam = set[l].dual;
    const double moved = project_interval(lam + rho1 * g.lambda[l], r.lambda);
    sq += std::pow((lam - moved) / rho1, 2);
  }
  for (std::size_t j = 0; j < s.phi.size(); ++j) {
    Vec ascent(s.phi[j].size());
    for (std::size_t i = 0; i < ascent.size(); ++i) ascent[i] = -g.phi[j][i];
    // Ascent is a descent step on the negated gradient.
    primal(s.phi[j], ascent, rho2, r.phi);
  }
  return std::sqrt(sq);
}

// Random Lagrangian instance: mixed quadratic / softmax workers, interior
// state, one to three planes with positive duals.
struct RandomInstance {
  std::vector<LocalObjective> objs;
  ProblemState state;
  CuttingPlaneSet planes{16};
  HyperParams hp;
  Vec f;
  std::vector<Vec> g;
  double p_bar = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  LagrangianContext context() const { return {state, planes, hp, f, g, p_bar}; }
  void refresh() {
    f.resize(objs.size());
    g.resize(objs.size());
    for (std::size_t j = 0; j < objs.size(); ++j) {
      f[j] = objs[j].loss(state.w[j]);
      g[j] = objs[j].grad(state.w[j]);
    }
  }
};

inline RandomInstance random_instance(Rng& rng, std::size_t n, std::size_t dim) {
  RandomInstance r;
  // Softmax with 2 classes and 1 feature has exactly 4 parameters.
  const bool softmax = dim == 4 && rng.uniform() < 0.5;
  for (std::size_t j = 0; j < n; ++j) {
    if (softmax) {
      const std::size_t m = 6;
      Eigen::MatrixXd x(static_cast<Eigen::Index>(m), 1);
      std::vector<int> y(m);
      for (std::size_t i = 0; i < m; ++i) {
        x(static_cast<Eigen::Index>(i), 0) = rng.normal();
        y[i] = 1 + static_cast<int>(rng.index(2));
      }
      r.objs.push_back(LocalObjective::softmax(std::move(x), std::move(y), 2, 0.01));
    } else {
      Vec center(dim);
      for (double& c : center) c = rng.uniform(-1.0, 1.0);
      r.objs.push_back(LocalObjective::quadratic(std::move(center), rng.uniform(0.5, 2.0)));
    }
  }
  r.state = ProblemState::zeros(n, dim);
  for (auto& w : r.state.w) {
    for (double& x : w) x = rng.uniform(-1.0, 1.0);
  }
  for (double& x : r.state.z) x = rng.uniform(-1.0, 1.0);
  for (auto& phi : r.state.phi) {
    for (double& x : phi) x = rng.uniform(-1.0, 1.0);
  }
  r.state.h = rng.uniform(0.1, 2.0);
  r.hp.kappa1 = rng.uniform(0.5, 2.0);
  r.p_bar = 1.0 / static_cast<double>(n);
  const std::size_t count = 1 + rng.index(3);
  for (std::size_t l = 0; l < count; ++l) {
    Vec a = random_simplex(rng, n);
    for (double& x : a) x -= r.p_bar;
    r.planes.add(std::move(a), 0);
    r.planes.set_dual(l, rng.uniform(0.05, 1.0));
  }
  r.c1 = rng.uniform(0.0, 0.5);
  r.c2 = rng.uniform(0.0, 0.5);
  r.refresh();
  return r;
}

// ---------------------------------------------------------------------------
// Synchronous reference loop: every worker active at every iteration, the
// Gauss-Seidel sweep w, z, h, lambda, phi, then plane maintenance.

struct ReferenceTrace {
  std::vector<ProblemState> states;  // after each iteration
  std::vector<Vec> duals;
  std::vector<double> gaps;
};

inline ReferenceTrace synchronous_reference(const HyperParams& hp,
                                            const AmbiguitySpec& spec,
                                            const std::vector<LocalObjective>& objs,
                                            PlaneMode mode, std::size_t iters) {
  const std::size_t n = objs.size();
  const Schedules sched(hp, n);
  const double p_bar = nominal_weight(hp, n);
  ProblemState s = ProblemState::zeros(n, objs.front().dim());
  Vec f(n);
  std::vector<Vec> g(n);
  auto refresh = [&] {
    for (std::size_t j = 0; j < n; ++j) {
      f[j] = objs[j].loss(s.w[j]);
      g[j] = objs[j].grad(s.w[j]);
    }
  };
  refresh();
  CuttingPlaneSet set(hp.max_planes);
  set.add(generate_plane(spec, f, p_bar), 0);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  ReferenceTrace trace;
  for (std::size_t t = 0; t < iters; ++t) {
    step_w(s, set, hp, f, g, p_bar, all, sched.eta(t, set.size()));
    refresh();
    const double eta = sched.eta(t, set.size());
    step_z(s, hp, eta);
    step_h(s, set, hp, sched.eta_h(t, set.size()));
    step_lambda(set, s, hp, f, p_bar, sched.c1(t));
    set.record_duals();
    step_phi(s, hp, all, sched.c2(t));
    maybe_update_planes(set, spec, f, t, hp, mode);
    s.t = t + 1;
    trace.states.push_back(s);
    trace.duals.push_back(set.duals());
  }
  return trace;
}

}  // namespace aspire::oracle
