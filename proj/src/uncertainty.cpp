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

#include "aspire/uncertainty.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "aspire/lp.hpp"

namespace aspire {

namespace {

constexpr double kSimplexTol = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

void check_simplex(const Vec& q, const char* name) {
  double sum = 0.0;
  for (double x : q) {
    require(std::isfinite(x) && x >= 0.0,
            std::string(name) + " must be nonnegative");
    sum += x;
  }
  require(std::abs(sum - 1.0) <= kSimplexTol,
          std::string(name) + " must sum to one");
}

void check_losses(const AmbiguitySpec& spec, std::span<const double> f) {
  if (f.size() != spec.workers()) {
    throw DimensionMismatch("loss vector length does not match the set");
  }
  for (double x : f) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite loss value");
  }
}

// Clip float noise below zero and renormalise onto the simplex.
WorstCase finish(Vec p, std::span<const double> f, double p_bar,
                 bool approximate = false) {
  double sum = 0.0;
  for (double& x : p) {
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (sum > 0.0) {
    for (double& x : p) x /= sum;
  }
  WorstCase wc;
  wc.value = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) wc.value += (p[j] - p_bar) * f[j];
  wc.p = std::move(p);
  wc.approximate = approximate;
  return wc;
}

// Stable order of indices by key; equal keys keep the lower worker index
// first.
std::vector<std::size_t> order_by(const Vec& key, bool descending) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return descending ? key[a] > key[b] : key[a] < key[b];
    return a < b;
  });
  return idx;
}

// CD-norm transfer plan for a fixed price `nu` on the deviation budget.
struct Transfer {
  Vec moved;          // signed mass added to q
  double budget = 0;  // sum |moved_j| / p_tilde_j
  double gain = 0;    // sum f_j moved_j
};

Transfer cdnorm_transfer(const AmbiguitySpec& spec, std::span<const double> f,
                         double nu) {
  const std::size_t n = f.size();
  Vec recv_key(n), donor_key(n);
  for (std::size_t j = 0; j < n; ++j) {
    recv_key[j] = f[j] - nu / spec.p_tilde[j];
    donor_key[j] = f[j] + nu / spec.p_tilde[j];
  }
  const auto receivers = order_by(recv_key, /*descending=*/true);
  const auto donors = order_by(donor_key, /*descending=*/false);

  Transfer tr;
  tr.moved.assign(n, 0.0);
  std::size_t ri = 0, di = 0;
  double recv_left = n ? spec.p_tilde[receivers[0]] : 0.0;
  double donor_left =
      n ? std::min(spec.p_tilde[donors[0]], spec.q[donors[0]]) : 0.0;
  while (ri < n && di < n) {
    const std::size_t r = receivers[ri];
    const std::size_t d = donors[di];
    if (!(recv_key[r] > donor_key[d])) break;
    const double amount = std::min(recv_left, donor_left);
    tr.moved[r] += amount;
    tr.moved[d] -= amount;
    recv_left -= amount;
    donor_left -= amount;
    if (recv_left <= 0.0) {
      if (++ri < n) recv_left = spec.p_tilde[receivers[ri]];
    }
    if (donor_left <= 0.0) {
      if (++di < n) {
        donor_left = std::min(spec.p_tilde[donors[di]], spec.q[donors[di]]);
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    tr.budget += std::abs(tr.moved[j]) / spec.p_tilde[j];
    tr.gain += f[j] * tr.moved[j];
  }
  return tr;
}

Vec simplex_projection(const Vec& v) {
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Eigen::MatrixXd default_ground_cost(std::size_t n) {
  Eigen::MatrixXd c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::abs(static_cast<double>(i) - static_cast<double>(j));
    }
  }
  return c;
}

LpProblem transport_lp(const AmbiguitySpec& spec, std::span<const double> f,
                       std::span<const double> fixed_p) {
  // Variables: p (n) followed by the plan gamma (n*n, row-major i*n + j).
  const auto n = static_cast<Eigen::Index>(spec.workers());
  const Eigen::MatrixXd cost =
      spec.ground_cost.size() ? spec.ground_cost : default_ground_cost(spec.workers());
  LpProblem lp;
  const Eigen::Index nv = n + n * n;
  lp.c = Eigen::VectorXd::Zero(nv);
  const bool fixed = !fixed_p.empty();
  const Eigen::Index rows = 2 * n + 1;
  lp.a_eq = Eigen::MatrixXd::Zero(rows, nv);
  lp.b_eq = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      lp.a_eq(i, n + i * n + j) = 1.0;
      lp.a_eq(n + j, n + i * n + j) = 1.0;
    }
    lp.a_eq(i, i) = -1.0;
    lp.b_eq(n + i) = spec.q[static_cast<std::size_t>(i)];
    lp.a_eq(2 * n, i) = 1.0;
  }
  lp.b_eq(2 * n) = 1.0;
  if (fixed) {
    // Minimum transport cost from a given p: pin p through its bounds.
    lp.sense = Sense::kMinimize;
    lp.lower = Eigen::VectorXd::Zero(nv);
    lp.upper = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < n; ++i) {
      lp.lower(i) = lp.upper(i) = fixed_p[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) lp.c(n + i * n + j) = cost(i, j);
    }
    return lp;
  }
  lp.sense = Sense::kMaximize;
  for (Eigen::Index i = 0; i < n; ++i) lp.c(i) = f[static_cast<std::size_t>(i)];
  lp.a_ineq = Eigen::MatrixXd::Zero(1, nv);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) lp.a_ineq(0, n + i * n + j) = cost(i, j);
  }
  lp.b_ineq = Eigen::VectorXd::Constant(1, spec.radius);
  return lp;
}

}  // namespace

std::string to_string(AmbiguityKind kind) {
  switch (kind) {
    case AmbiguityKind::kCDNorm: return "cdnorm";
    case AmbiguityKind::kBox: return "box";
    case AmbiguityKind::kEllipsoid: return "ellipsoid";
    case AmbiguityKind::kPolyhedron: return "polyhedron";
    case AmbiguityKind::kKL: return "kl";
    case AmbiguityKind::kWasserstein1: return "wasserstein1";
  }
  return "unknown";
}

AmbiguityKind parse_ambiguity_kind(const std::string& name) {
  if (name == "cdnorm") return AmbiguityKind::kCDNorm;
  if (name == "box") return AmbiguityKind::kBox;
  if (name == "ellipsoid") return AmbiguityKind::kEllipsoid;
  if (name == "polyhedron") return AmbiguityKind::kPolyhedron;
  if (name == "kl") return AmbiguityKind::kKL;
  if (name == "wasserstein1") return AmbiguityKind::kWasserstein1;
  throw InvalidArgument("unknown ambiguity set kind: " + name);
}

std::size_t AmbiguitySpec::workers() const {
  switch (kind) {
    case AmbiguityKind::kBox: return lower.size();
    case AmbiguityKind::kPolyhedron: return static_cast<std::size_t>(d_rows.cols());
    default: return q.size();
  }
}

AmbiguitySpec AmbiguitySpec::cdnorm(Vec q, Vec p_tilde, double budget) {
  AmbiguitySpec s;
  s.kind = AmbiguityKind::kCDNorm;
  s.q = std::move(q);
  s.p_tilde = std::move(p_tilde);
  s.budget = budget;
  return s;
}

AmbiguitySpec AmbiguitySpec::box(Vec lower, Vec upper) {
  AmbiguitySpec s;
  s.kind = AmbiguityKind::kBox;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

AmbiguitySpec AmbiguitySpec::ellipsoid(Vec q, Eigen::MatrixXd shape,
                                       double radius) {
  AmbiguitySpec s;
  s.kind = AmbiguityKind::kEllipsoid;
  s.q = std::move(q);
  s.shape = std::move(shape);
  s.radius = radius;
  return s;
}

AmbiguitySpec AmbiguitySpec::polyhedron(Eigen::MatrixXd d_rows,
                                        Eigen::VectorXd d_rhs) {
  AmbiguitySpec s;
  s.kind = AmbiguityKind::kPolyhedron;
  s.d_rows = std::move(d_rows);
  s.d_rhs = std::move(d_rhs);
  return s;
}

AmbiguitySpec AmbiguitySpec::kl(Vec q, double radius) {
  AmbiguitySpec s;
  s.kind = AmbiguityKind::kKL;
  s.q = std::move(q);
  s.radius = radius;
  return s;
}

AmbiguitySpec AmbiguitySpec::wasserstein1(Vec q, double radius) {
  AmbiguitySpec s;
  s.kind = AmbiguityKind::kWasserstein1;
  s.q = std::move(q);
  s.radius = radius;
  return s;
}

void validate(const AmbiguitySpec& spec) {
  const std::size_t n = spec.workers();
  require(n >= 1, "ambiguity set needs at least one worker");
  switch (spec.kind) {
    case AmbiguityKind::kCDNorm:
      check_simplex(spec.q, "prior q");
      require(spec.p_tilde.size() == n, "p_tilde length must match q");
      for (double x : spec.p_tilde) {
        require(std::isfinite(x) && x > 0.0, "p_tilde entries must be > 0");
      }
      require(std::isfinite(spec.budget) && spec.budget >= 0.0,
              "budget Gamma must be >= 0");
      break;
    case AmbiguityKind::kBox: {
      require(spec.upper.size() == n, "box bounds must have equal length");
      double lo = 0.0, up = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        require(std::isfinite(spec.lower[j]) && std::isfinite(spec.upper[j]),
                "box bounds must be finite");
        require(spec.lower[j] <= spec.upper[j], "box bound low > upp");
        lo += spec.lower[j];
        up += spec.upper[j];
      }
      if (lo > 1.0 + 1e-12 || up < 1.0 - 1e-12) {
        throw Infeasible("box bounds admit no distribution");
      }
      break;
    }
    case AmbiguityKind::kEllipsoid: {
      check_simplex(spec.q, "prior q");
      require(spec.shape.rows() == static_cast<Eigen::Index>(n) &&
                  spec.shape.cols() == static_cast<Eigen::Index>(n),
              "ellipsoid shape must be N x N");
      require(spec.shape.isApprox(spec.shape.transpose(), 1e-12),
              "ellipsoid shape must be symmetric");
      Eigen::LLT<Eigen::MatrixXd> llt(spec.shape);
      require(llt.info() == Eigen::Success,
              "ellipsoid shape must be positive definite");
      require(std::isfinite(spec.radius) && spec.radius >= 0.0,
              "ellipsoid radius must be >= 0");
      break;
    }
    case AmbiguityKind::kPolyhedron:
      require(spec.d_rhs.size() == spec.d_rows.rows(),
              "polyhedron rhs length must match D rows");
      require(spec.d_rows.allFinite() && spec.d_rhs.allFinite(),
              "polyhedron coefficients must be finite");
      break;
    case AmbiguityKind::kKL:
      check_simplex(spec.q, "prior q");
      require(std::isfinite(spec.radius) && spec.radius >= 0.0,
              "KL radius must be >= 0");
      if (spec.radius > 0.0) {
        for (double x : spec.q) {
          require(x > 0.0, "KL set cannot use a prior with zero entries");
        }
      }
      break;
    case AmbiguityKind::kWasserstein1:
      check_simplex(spec.q, "prior q");
      if (!(spec.radius >= 0.0)) {
        throw Infeasible("Wasserstein radius must be >= 0");
      }
      if (spec.ground_cost.size()) {
        require(spec.ground_cost.rows() == static_cast<Eigen::Index>(n) &&
                    spec.ground_cost.cols() == static_cast<Eigen::Index>(n),
                "ground cost must be N x N");
      }
      break;
  }
}

WorstCase solve_cdnorm(const AmbiguitySpec& spec, std::span<const double> f,
                       double p_bar) {
  if (spec.kind != AmbiguityKind::kCDNorm) {
    throw InvalidArgument("solve_cdnorm needs a CD-norm set");
  }
  validate(spec);
  check_losses(spec, f);
  const std::size_t n = f.size();
  auto apply = [&](const Vec& moved) {
    Vec p(spec.q);
    for (std::size_t j = 0; j < n; ++j) p[j] += moved[j];
    return finish(std::move(p), f, p_bar);
  };
  if (spec.budget == 0.0) return finish(spec.q, f, p_bar);

  // Lagrangian relaxation of the budget row: for a price nu, greedily match
  // receivers (largest f - nu/p~) with donors (smallest f + nu/p~). The
  // optimal price is the breakpoint where the budget used crosses Gamma;
  // mixing the two adjacent plans spends exactly Gamma.
  Transfer lo = cdnorm_transfer(spec, f, 0.0);
  if (lo.budget <= spec.budget) return apply(lo.moved);

  double nu_lo = 0.0;
  const auto [fmin, fmax] = std::minmax_element(f.begin(), f.end());
  const double pmax = *std::max_element(spec.p_tilde.begin(), spec.p_tilde.end());
  double nu_hi = (*fmax - *fmin) * pmax * 1.0000001 + 1e-300;
  Transfer hi = cdnorm_transfer(spec, f, nu_hi);

  for (int iter = 0; iter < 500; ++iter) {
    const double db = lo.budget - hi.budget;
    if (db <= 0.0) break;
    double nu = (lo.gain - hi.gain) / db;
    const bool secant = nu > nu_lo && nu < nu_hi;
    if (!secant) nu = 0.5 * (nu_lo + nu_hi);
    if (!(nu > nu_lo && nu < nu_hi)) break;  // bracket exhausted
    Transfer mid = cdnorm_transfer(spec, f, nu);
    if (secant) {
      const double at_mid = mid.gain - nu * mid.budget;
      const double on_line = lo.gain - nu * lo.budget;
      const double scale = 1.0 + std::abs(on_line) + std::abs(nu * lo.budget);
      if (at_mid <= on_line + 1e-13 * scale) break;  // both ends optimal
    }
    if (mid.budget == spec.budget) return apply(mid.moved);
    if (mid.budget > spec.budget) {
      lo = std::move(mid);
      nu_lo = nu;
    } else {
      hi = std::move(mid);
      nu_hi = nu;
    }
  }
  const double theta =
      (spec.budget - hi.budget) / std::max(lo.budget - hi.budget, 1e-300);
  Vec moved(n);
  for (std::size_t j = 0; j < n; ++j) {
    moved[j] = theta * lo.moved[j] + (1.0 - theta) * hi.moved[j];
  }
  return apply(moved);
}

WorstCase solve_box(const AmbiguitySpec& spec, std::span<const double> f,
                    double p_bar) {
  if (spec.kind != AmbiguityKind::kBox) {
    throw InvalidArgument("solve_box needs a box set");
  }
  validate(spec);
  check_losses(spec, f);
  Vec p(spec.lower);
  double remaining = 1.0 - std::accumulate(p.begin(), p.end(), 0.0);
  Vec key(f.begin(), f.end());
  for (std::size_t j : order_by(key, /*descending=*/true)) {
    if (remaining <= 0.0) break;
    const double add = std::min(spec.upper[j] - spec.lower[j], remaining);
    p[j] += add;
    remaining -= add;
  }
  return finish(std::move(p), f, p_bar);
}

WorstCase solve_ellipsoid(const AmbiguitySpec& spec, std::span<const double> f,
                          double p_bar) {
  if (spec.kind != AmbiguityKind::kEllipsoid) {
    throw InvalidArgument("solve_ellipsoid needs an ellipsoid set");
  }
  validate(spec);
  check_losses(spec, f);
  const auto n = static_cast<Eigen::Index>(f.size());
  const Eigen::VectorXd c = as_eigen(f);
  const Eigen::VectorXd q = as_eigen(spec.q);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd q1 = spec.shape * ones;
  const double kappa = ones.dot(spec.shape * c) / ones.dot(q1);
  const Eigen::VectorXd centered = c - kappa * ones;
  const Eigen::VectorXd v = spec.shape * centered;
  const double norm2 = centered.dot(v);  // v' Q^{-1} v
  if (spec.radius == 0.0 || !(norm2 > 1e-300)) return finish(spec.q, f, p_bar);

  Eigen::VectorXd p = q + std::sqrt(spec.radius / norm2) * v;
  if (p.minCoeff() >= -1e-12) {
    return finish(Vec(p.data(), p.data() + n), f, p_bar);
  }

  // Closed form left the orthant: projected ascent with alternating
  // projections onto the simplex and (radially) onto the ellipsoid.
  Eigen::LLT<Eigen::MatrixXd> llt(spec.shape);
  auto shrink = [&](Eigen::VectorXd x) {
    const Eigen::VectorXd d = x - q;
    const double r2 = d.dot(llt.solve(d));
    if (r2 > spec.radius) x = q + d * std::sqrt(spec.radius / r2);
    return x;
  };
  const Eigen::VectorXd dir = centered / std::sqrt(centered.squaredNorm());
  const double step0 =
      std::sqrt(spec.radius * spec.shape.diagonal().maxCoeff());
  Eigen::VectorXd x = q;
  Eigen::VectorXd best = q;
  double best_val = c.dot(q);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd y = x + (step0 / std::sqrt(k + 1.0)) * dir;
    Vec proj = simplex_projection(Vec(y.data(), y.data() + n));
    x = shrink(Eigen::Map<Eigen::VectorXd>(proj.data(), n));
    const double val = c.dot(x);
    if (val > best_val) {
      best_val = val;
      best = x;
    }
  }
  return finish(Vec(best.data(), best.data() + n), f, p_bar,
                /*approximate=*/true);
}

WorstCase solve_polyhedron(const AmbiguitySpec& spec,
                           std::span<const double> f, double p_bar) {
  if (spec.kind != AmbiguityKind::kPolyhedron) {
    throw InvalidArgument("solve_polyhedron needs a polyhedral set");
  }
  validate(spec);
  check_losses(spec, f);
  const auto n = static_cast<Eigen::Index>(f.size());
  LpProblem lp;
  lp.sense = Sense::kMaximize;
  lp.c = as_eigen(f);
  lp.a_eq = Eigen::MatrixXd::Ones(1, n);
  lp.b_eq = Eigen::VectorXd::Ones(1);
  lp.a_ineq = spec.d_rows;
  lp.b_ineq = spec.d_rhs;
  const LpSolution sol = simplex_solve(lp);
  if (sol.status == LpStatus::kInfeasible) {
    throw Infeasible("polyhedral ambiguity set is empty");
  }
  if (sol.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kInternal, "polyhedral subproblem reported unbounded");
  }
  return finish(Vec(sol.x.data(), sol.x.data() + n), f, p_bar);
}

WorstCase solve_kl(const AmbiguitySpec& spec, std::span<const double> f,
                   double p_bar) {
  if (spec.kind != AmbiguityKind::kKL) {
    throw InvalidArgument("solve_kl needs a KL set");
  }
  validate(spec);
  check_losses(spec, f);
  const std::size_t n = f.size();
  if (spec.radius == 0.0) return finish(spec.q, f, p_bar);

  const double fmax = *std::max_element(f.begin(), f.end());
  double top_mass = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (f[j] == fmax) top_mass += spec.q[j];
  }
  // Limit eta -> 0: the prior restricted to the argmax set.
  if (spec.radius >= -std::log(top_mass)) {
    Vec p(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (f[j] == fmax) p[j] = spec.q[j] / top_mass;
    }
    return finish(std::move(p), f, p_bar);
  }

  auto tilt = [&](double eta) {
    Vec p(n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = spec.q[j] * std::exp((f[j] - fmax) / eta);
      z += p[j];
    }
    for (double& x : p) x /= z;
    return p;
  };
  auto divergence = [&](double eta) { return kl_divergence(tilt(eta), spec.q); };

  // KL of the tilted family decreases in eta.
  double lo = 1e-8, hi = 1e8;
  for (int i = 0; i < 60 && divergence(lo) < spec.radius; ++i) lo *= 0.1;
  for (int i = 0; i < 60 && divergence(hi) > spec.radius; ++i) hi *= 10.0;
  double eta = hi;
  for (int iter = 0; iter < 200; ++iter) {
    eta = std::sqrt(lo * hi);
    const double d = divergence(eta);
    if (std::abs(d - spec.radius) <= 1e-10 && hi / lo < 1.0 + 1e-12) break;
    if (d > spec.radius) {
      lo = eta;
    } else {
      hi = eta;
    }
    if (hi / lo <= 1.0 + 1e-15) break;
  }
  eta = hi;  // feasible side
  const double resid = divergence(eta) - spec.radius;
  if (resid > 1e-10) {
    throw NumericalError("KL bisection failed to meet the divergence radius");
  }
  return finish(tilt(eta), f, p_bar);
}

WorstCase solve_wasserstein1(const AmbiguitySpec& spec,
                             std::span<const double> f, double p_bar) {
  if (spec.kind != AmbiguityKind::kWasserstein1) {
    throw InvalidArgument("solve_wasserstein1 needs a Wasserstein set");
  }
  validate(spec);
  check_losses(spec, f);
  const auto n = static_cast<Eigen::Index>(f.size());
  const LpSolution sol = simplex_solve(transport_lp(spec, f, {}));
  if (sol.status != LpStatus::kOptimal) {
    throw Infeasible("Wasserstein subproblem has no feasible plan");
  }
  return finish(Vec(sol.x.data(), sol.x.data() + n), f, p_bar);
}

WorstCase solve_worst_case(const AmbiguitySpec& spec,
                           std::span<const double> f, double p_bar) {
  switch (spec.kind) {
    case AmbiguityKind::kCDNorm: return solve_cdnorm(spec, f, p_bar);
    case AmbiguityKind::kBox: return solve_box(spec, f, p_bar);
    case AmbiguityKind::kEllipsoid: return solve_ellipsoid(spec, f, p_bar);
    case AmbiguityKind::kPolyhedron: return solve_polyhedron(spec, f, p_bar);
    case AmbiguityKind::kKL: return solve_kl(spec, f, p_bar);
    case AmbiguityKind::kWasserstein1: return solve_wasserstein1(spec, f, p_bar);
  }
  throw InvalidArgument("unknown ambiguity set kind");
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) d += p[j] * std::log(p[j] / q[j]);
  }
  return d;
}

double emd_line(std::span<const double> p, std::span<const double> q) {
  double cdf = 0.0, total = 0.0;
  for (std::size_t j = 0; j + 1 < p.size(); ++j) {
    cdf += p[j] - q[j];
    total += std::abs(cdf);
  }
  return total;
}

double constraint_residual(const AmbiguitySpec& spec,
                           std::span<const double> p) {
  const std::size_t n = p.size();
  double r = std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0);
  for (double x : p) r = std::max(r, -x);
  switch (spec.kind) {
    case AmbiguityKind::kCDNorm: {
      double used = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dev = std::abs(p[j] - spec.q[j]);
        r = std::max(r, dev - spec.p_tilde[j]);
        used += dev / spec.p_tilde[j];
      }
      r = std::max(r, used - spec.budget);
      break;
    }
    case AmbiguityKind::kBox:
      for (std::size_t j = 0; j < n; ++j) {
        r = std::max({r, spec.lower[j] - p[j], p[j] - spec.upper[j]});
      }
      break;
    case AmbiguityKind::kEllipsoid: {
      const Eigen::VectorXd d = as_eigen(p) - as_eigen(spec.q);
      const double r2 = d.dot(spec.shape.llt().solve(d));
      r = std::max(r, r2 - spec.radius);
      break;
    }
    case AmbiguityKind::kPolyhedron:
      if (spec.d_rows.rows() > 0) {
        r = std::max(r, (spec.d_rows * as_eigen(p) - spec.d_rhs).maxCoeff());
      }
      break;
    case AmbiguityKind::kKL:
      r = std::max(r, kl_divergence(p, spec.q) - spec.radius);
      break;
    case AmbiguityKind::kWasserstein1: {
      double dist = 0.0;
      if (spec.ground_cost.size() == 0) {
        dist = emd_line(p, spec.q);
      } else {
        const LpSolution sol = simplex_solve(transport_lp(spec, {}, p));
        dist = sol.status == LpStatus::kOptimal
                   ? sol.value
                   : std::numeric_limits<double>::infinity();
      }
      r = std::max(r, dist - spec.radius);
      break;
    }
  }
  return r;
}

AmbiguitySpec bench_instance(AmbiguityKind kind, std::size_t n,
                             std::uint64_t seed) {
  require(n >= 1, "bench instance needs n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  const double dn = static_cast<double>(n);
  Vec q(n);
  double sum = 0.0;
  for (double& x : q) sum += (x = unif(rng));
  for (double& x : q) x /= sum;
  switch (kind) {
    case AmbiguityKind::kCDNorm: {
      Vec pt(n);
      for (double& x : pt) x = 0.5 * unif(rng) / dn;
      return AmbiguitySpec::cdnorm(q, pt, std::sqrt(dn));
    }
    case AmbiguityKind::kBox:
      return AmbiguitySpec::box(Vec(n, 0.5 / dn), Vec(n, 2.0 / dn));
    case AmbiguityKind::kEllipsoid:
      return AmbiguitySpec::ellipsoid(
          q, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(n)),
          0.01 / dn);
    case AmbiguityKind::kPolyhedron: {
      const auto m = static_cast<Eigen::Index>(n);
      return AmbiguitySpec::polyhedron(Eigen::MatrixXd::Identity(m, m),
                                       Eigen::VectorXd::Constant(m, 2.0 / dn));
    }
    case AmbiguityKind::kKL:
      return AmbiguitySpec::kl(q, 0.1);
    case AmbiguityKind::kWasserstein1:
      return AmbiguitySpec::wasserstein1(q, 0.5);
  }
  throw InvalidArgument("unknown ambiguity set kind");
}

std::vector<BenchRow> uncertainty_bench(std::span<const AmbiguityKind> kinds,
                                        std::span<const std::size_t> sizes,
                                        std::size_t repetitions,
                                        std::uint64_t seed) {
  require(repetitions >= 1, "bench needs at least one repetition");
  std::vector<BenchRow> rows;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (AmbiguityKind kind : kinds) {
    for (std::size_t n : sizes) {
      const AmbiguitySpec spec = bench_instance(kind, n, seed + n);
      Vec f(n);
      std::vector<double> times;
      times.reserve(repetitions);
      volatile double sink = 0.0;
      for (std::size_t r = 0; r < repetitions; ++r) {
        for (double& x : f) x = unif(rng);
        const auto t0 = std::chrono::steady_clock::now();
        const WorstCase wc = solve_worst_case(spec, f, 1.0 / static_cast<double>(n));
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + wc.value;
        times.push_back(
            std::chrono::duration<double, std::nano>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      auto pct = [&](double q) {
        const double pos = q * static_cast<double>(times.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = static_cast<std::size_t>(std::ceil(pos));
        return times[lo] + (pos - static_cast<double>(lo)) * (times[hi] - times[lo]);
      };
      rows.push_back({kind, n, pct(0.5), pct(0.95)});
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "kind,N,median_ns,p95_ns\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << to_string(r.kind) << ',' << r.n << ',' << r.median_ns << ','
        << r.p95_ns << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace aspire
