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

// Acceptance driver. One line per criterion; exits nonzero when any fails.
// Thresholds are fixed here and never adjusted from observed results.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aspire/config.hpp"
#include "aspire/engine.hpp"
#include "aspire/experiments.hpp"
#include "aspire/lagrangian.hpp"
#include "aspire/uncertainty.hpp"
#include "spdlog/spdlog.h"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

using namespace aspire;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ExperimentConfig bundled(const std::string& name, const fs::path& out) {
  ExperimentConfig cfg = load_config(testing::config_path(name));
  cfg.output_dir = out.string();
  return cfg;
}

// 1 -----------------------------------------------------------------------

Outcome subproblem_oracles() {
  Rng rng(1);
  double worst_cd = 0.0, worst_box = 0.0, worst_poly = 0.0, worst_kl = 0.0, worst_w1 = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    {
      const std::size_t n = 3 + rng.index(4);
      const auto spec = oracle::random_cdnorm(rng, n);
      const Vec f = oracle::random_losses(rng, n);
      const double pb = 1.0 / static_cast<double>(n);
      worst_cd = std::max(worst_cd, std::abs(solve_cdnorm(spec, f, pb).value -
                                             oracle::cdnorm_lp_value(spec.q, spec.p_tilde,
                                                                     spec.budget, f, pb)));
    }
    {
      const std::size_t n = 2 + rng.index(5);
      const auto spec = oracle::random_box(rng, n);
      const Vec f = oracle::random_losses(rng, n);
      const double pb = 1.0 / static_cast<double>(n);
      worst_box = std::max(worst_box, std::abs(solve_box(spec, f, pb).value -
                                               oracle::box_lp_value(spec.lower, spec.upper,
                                                                    f, pb)));
    }
    {
      const std::size_t n = 2 + rng.index(3);
      const auto spec = oracle::random_polyhedron(rng, n, rng.index(4));
      const Vec f = oracle::random_losses(rng, n);
      const double pb = 1.0 / static_cast<double>(n);
      worst_poly = std::max(
          worst_poly, std::abs(solve_polyhedron(spec, f, pb).value -
                               oracle::polyhedron_value(spec.d_rows, spec.d_rhs, f, pb)));
    }
    {
      const auto spec = oracle::random_kl(rng, 4);
      const Vec f = oracle::random_losses(rng, 4);
      worst_kl = std::max(worst_kl, std::abs(solve_kl(spec, f, 0.25).value -
                                             oracle::kl_dual_value(spec.q, f, spec.radius,
                                                                   0.25)));
    }
    {
      const auto spec = oracle::random_wasserstein(rng, 3);
      const Vec f = oracle::random_losses(rng, 3);
      worst_w1 = std::max(
          worst_w1, std::abs(solve_wasserstein1(spec, f, 1.0 / 3.0).value -
                             oracle::wasserstein3_grid_value(spec.q, f, spec.radius,
                                                             1.0 / 3.0)));
    }
  }
  const bool ok = worst_cd <= 1e-9 && worst_box <= 1e-9 && worst_poly <= 1e-9 &&
                  worst_kl <= 1e-6 && worst_w1 <= 1e-3;
  std::ostringstream os;
  os << "max |err| cdnorm " << worst_cd << " box " << worst_box << " polyhedron "
     << worst_poly << " kl " << worst_kl << " w1 " << worst_w1;
  return {ok, os.str()};
}

// 2 -----------------------------------------------------------------------

Outcome gradient_blocks() {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = oracle::random_instance(rng, 1 + rng.index(4), 1 + rng.index(5));
    const auto fd = oracle::fd_gradients(r.state, oracle::plane_data(r.planes), r.objs,
                                         r.p_bar, r.hp.kappa1, r.c1, r.c2);
    const auto ctx = r.context();
    for (std::size_t j = 0; j < r.objs.size(); ++j) {
      worst = std::max(worst, oracle::rel_err(grad_w(ctx, j), fd.w[j]));
      worst = std::max(worst, oracle::rel_err(grad_phi(ctx, j, r.c2), fd.phi[j]));
    }
    worst = std::max(worst, oracle::rel_err(grad_z(ctx), fd.z));
    worst = std::max(worst, oracle::rel_err(grad_h(ctx), fd.h));
    for (std::size_t l = 0; l < r.planes.size(); ++l) {
      worst = std::max(worst, oracle::rel_err(grad_lambda(ctx, l, r.c1), fd.lambda[l]));
    }
  }
  return {worst <= 1e-5, "max rel err " + fmt("%.3g", worst)};
}

// 3 -----------------------------------------------------------------------

Outcome quadratic_convergence(const fs::path& out) {
  ExperimentConfig cfg = bundled("quadratic_demo.json", out);
  Problem prob = build_problem(cfg);
  const auto robust = run_experiment(cfg, prob).result;
  const bool converged = robust.t_eps && *robust.t_eps < 5000;

  // Gamma = 0 pins p at q; the minimizer is the curvature- and q-weighted
  // average of the centers.
  ExperimentConfig flat = bundled("quadratic_demo.json", out);
  flat.ambiguity_json = R"({"kind": "cdnorm", "q": [0.5, 0.3, 0.2], "p_tilde": 0.2,
                            "budget": 0.0})";
  Problem flat_prob = build_problem(flat);
  const auto base = run_experiment(flat, flat_prob).result;
  const Vec& q = flat.engine.ambiguity.q;
  const auto& centers = flat.objective.centers;
  const Vec curv = flat.objective.curvatures.size() == 1
                       ? Vec(centers.size(), flat.objective.curvatures[0])
                       : flat.objective.curvatures;
  Vec target(centers[0].size(), 0.0);
  double mass = 0.0;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    mass += q[j] * curv[j];
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += q[j] * curv[j] * centers[j][i];
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    dist = std::max(dist, std::abs(base.state.z[i] - target[i] / mass));
  }
  std::ostringstream os;
  os << "Gamma=1 t_eps " << (robust.t_eps ? std::to_string(*robust.t_eps) : "none")
     << " gap " << robust.final_gap << "; Gamma=0 |z - z*|_inf " << dist;
  return {converged && dist <= 1e-2, os.str()};
}

// 4 -----------------------------------------------------------------------

Outcome gamma_trend(const fs::path& out) {
  const auto rows = sweep_gamma(bundled("heterogeneous_softmax.json", out), {0.0, 0.5, 1.0, 2.0});
  double lo = rows[0].loss_worst, hi = rows[0].loss_worst;
  for (const auto& r : rows) {
    lo = std::min(lo, r.loss_worst);
    hi = std::max(hi, r.loss_worst);
  }
  const double slack = 0.05 * (hi - lo);
  bool ok = rows.size() == 4;
  std::ostringstream os;
  os << "Loss_w";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    os << " G=" << rows[k].gamma << ":" << fmt("%.6f", rows[k].loss_worst);
    if (k > 0 && rows[k].loss_worst > rows[k - 1].loss_worst + slack) ok = false;
  }
  os << " (slack " << slack << ")";
  return {ok, os.str()};
}

// 5 -----------------------------------------------------------------------

Outcome ease_efficiency(const fs::path& out) {
  ExperimentConfig cfg = bundled("quadratic_demo.json", out);
  Problem prob = build_problem(cfg);
  cfg.engine.mode = RunMode::kEase;
  const auto ease = run_experiment(cfg, prob).result;
  cfg.engine.mode = RunMode::kCuttingPlane;
  const auto cp = run_experiment(cfg, prob).result;
  const bool planes_ok = ease.planes_distinct <= cp.planes_distinct;
  bool time_ok = false;
  std::ostringstream os;
  os << "distinct planes ease " << ease.planes_distinct << " cp " << cp.planes_distinct;
  if (ease.t_eps && cp.t_eps) {
    const std::size_t ce = *ease.t_eps + ease.plane_solves;
    const std::size_t cc = *cp.t_eps + cp.plane_solves;
    time_ok = ce <= cc;
    os << "; t_eps+solves ease " << *ease.t_eps << "+" << ease.plane_solves << "=" << ce
       << " cp " << *cp.t_eps << "+" << cp.plane_solves << "=" << cc;
  } else {
    time_ok = !cp.t_eps ? true : false;
    os << "; ease t_eps " << (ease.t_eps ? "set" : "none") << " cp t_eps "
       << (cp.t_eps ? "set" : "none");
  }
  return {planes_ok && time_ok, os.str()};
}

// 6 -----------------------------------------------------------------------

Outcome asynchrony(const fs::path& out) {
  ExperimentConfig cfg = bundled("straggler.json", out);
  Problem prob = build_problem(cfg);
  const std::size_t n = prob.data.train.size();

  ExperimentConfig one = cfg;
  one.engine.quorum = {QuorumMode::kFixed, 1, cfg.engine.quorum.beta1,
                       cfg.engine.quorum.smoothing};
  ExperimentConfig all = cfg;
  all.engine.quorum = {QuorumMode::kFixed, n, cfg.engine.quorum.beta1,
                       cfg.engine.quorum.smoothing};
  const auto r1 = run_experiment(one, prob).result;
  const auto rn = run_experiment(all, prob).result;
  const bool faster = r1.time_eps && (!rn.time_eps || *r1.time_eps < *rn.time_eps);

  // Adaptive: the S in force at t+1 is s iff the spread after t is <= beta1.
  const auto ad = run_experiment(cfg, prob).result;
  const auto& recs = ad.log.records();
  const auto& qp = cfg.engine.quorum;
  std::size_t mismatches = 0, crossings = 0;
  for (std::size_t t = 0; t + 1 < recs.size(); ++t) {
    const auto& sp = recs[t].spread;
    const std::size_t expect = (!sp || *sp <= qp.beta1) ? qp.s : n;
    if (recs[t + 1].quorum != expect) ++mismatches;
    if (recs[t + 1].quorum != recs[t].quorum) ++crossings;
  }
  const bool switches_ok =
      mismatches == 0 && crossings == ad.switches.size() && crossings >= 2;
  std::ostringstream os;
  os << "time_eps S=1 " << (r1.time_eps ? fmt("%.1f", *r1.time_eps) : "none") << " S=N "
     << (rn.time_eps ? fmt("%.1f", *rn.time_eps) : "none") << "; adaptive switches "
     << ad.switches.size() << ", rule mismatches " << mismatches;
  return {faster && switches_ok, os.str()};
}

// 7 -----------------------------------------------------------------------

Outcome protocol_fuzz(const fs::path& out) {
  ExperimentConfig base = bundled("quadratic_demo.json", out);
  Problem prob = build_problem(base);
  Rng rng(7);
  std::size_t steps = 0, runs = 0, bad = 0;
  while (steps < 10000) {
    EngineConfig cfg = base.engine;
    cfg.hp.staleness = 1 + rng.index(5);
    cfg.hp.max_planes = 1 + rng.index(4);
    cfg.hp.plane_period = 1 + rng.index(5);
    cfg.mode = rng.index(2) == 0 ? RunMode::kEase : RunMode::kCuttingPlane;
    cfg.quorum.mode = rng.index(2) == 0 ? QuorumMode::kFixed : QuorumMode::kAdaptive;
    // Adaptive needs a small quorum strictly below N.
    cfg.quorum.s = 1 + rng.index(cfg.quorum.mode == QuorumMode::kAdaptive ? 2 : 3);
    cfg.quorum.beta1 = rng.uniform(0.1, 3.0);
    cfg.delay.base = {rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)};
    cfg.delay.jitter = rng.uniform(0.0, 0.9);
    if (rng.index(2) == 0) {
      const double t0 = rng.uniform(0.0, 100.0);
      cfg.delay.stragglers.push_back(
          {rng.index(3), t0, t0 + rng.uniform(10.0, 200.0), rng.uniform(2.0, 10.0)});
    }
    cfg.seed = rng.raw();
    cfg.max_iters = 250;
    cfg.eps = 0.0;
    cfg.check_invariants = true;
    const auto res = run(cfg, prob.data.train);
    bad += res.invariant_violations;
    if (res.max_staleness > cfg.hp.staleness) ++bad;
    for (const auto& r : res.log.records()) {
      if (r.active.size() < r.quorum) ++bad;
      if (r.planes > cfg.hp.max_planes) ++bad;
      if (r.staleness > cfg.hp.staleness) ++bad;
    }
    steps += res.iterations;
    ++runs;
  }
  std::ostringstream os;
  os << steps << " steps over " << runs << " runs, violations " << bad;
  return {bad == 0, os.str()};
}

// 8 -----------------------------------------------------------------------

Outcome determinism(const fs::path& out) {
  const char* names[] = {"quadratic_demo.json", "straggler.json", "heterogeneous_softmax.json",
                         "homogeneous_softmax.json", "malicious.json"};
  std::size_t same = 0;
  std::ostringstream os;
  for (const char* name : names) {
    std::string logs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = out / (std::string(name) + "_" + std::to_string(k));
      cmd_run(bundled(name, dir));
      logs[k] = testing::slurp(dir / "runlog.jsonl");
    }
    if (!logs[0].empty() && logs[0] == logs[1]) {
      ++same;
    } else {
      os << name << " differs; ";
    }
  }
  os << same << "/5 runlogs byte-identical";
  return {same == 5, os.str()};
}

// 9 -----------------------------------------------------------------------

Outcome baseline_ordering(const fs::path& out) {
  const auto het = baseline(bundled("heterogeneous_softmax.json", out / "het"));
  const auto mal = baseline(bundled("malicious.json", out / "mal"));
  auto pick = [](const std::vector<BaselineRow>& rows, const std::string& mode) {
    for (const auto& r : rows) {
      if (r.mode == mode) return r;
    }
    throw std::runtime_error("missing baseline row " + mode);
  };
  const auto he = pick(het, "aspire_ease"), hm = pick(het, "mix_even");
  const auto me = pick(mal, "aspire_ease"), mm = pick(mal, "mix_even");
  const bool loss_ok = he.metrics.loss_worst <= hm.metrics.loss_worst;
  const bool attack_ok = me.attack_rate && mm.attack_rate && *me.attack_rate < *mm.attack_rate;
  std::ostringstream os;
  os << "Loss_w ease " << fmt("%.6f", he.metrics.loss_worst) << " mix_even "
     << fmt("%.6f", hm.metrics.loss_worst) << "; attack rate ease "
     << (me.attack_rate ? fmt("%.4f", *me.attack_rate) : "n/a") << " mix_even "
     << (mm.attack_rate ? fmt("%.4f", *mm.attack_rate) : "n/a");
  return {loss_ok && attack_ok, os.str()};
}

// 10 ----------------------------------------------------------------------

// R^2 of the least-squares fit y = a x + b.
double r_squared(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  const double mx = oracle::sum(x) / n, my = oracle::sum(y) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

Outcome complexity_trend() {
  std::vector<std::size_t> sizes;
  for (int e = 8; e <= 16; ++e) sizes.push_back(std::size_t{1} << e);
  const AmbiguityKind fast[] = {AmbiguityKind::kCDNorm, AmbiguityKind::kBox};
  const auto rows = uncertainty_bench(fast, sizes, 31, 10);
  const AmbiguityKind slow[] = {AmbiguityKind::kPolyhedron};
  const std::size_t n10[] = {1024};
  const auto poly = uncertainty_bench(slow, n10, 3, 10);
  bool ok = true;
  std::ostringstream os;
  for (auto kind : fast) {
    Vec x, y;
    double at1024 = 0.0;
    for (const auto& r : rows) {
      if (r.kind != kind) continue;
      const double nn = static_cast<double>(r.n);
      x.push_back(nn * std::log2(nn));
      y.push_back(r.median_ns);
      if (r.n == 1024) at1024 = r.median_ns;
    }
    const double r2 = r_squared(x, y);
    const double ratio = poly[0].median_ns / at1024;
    ok = ok && r2 >= 0.9 && ratio >= 10.0;
    os << to_string(kind) << " R2 " << fmt("%.4f", r2) << " speedup@1024 "
       << fmt("%.0f", ratio) << "x; ";
  }
  os << "polyhedron@1024 " << fmt("%.3g", poly[0].median_ns * 1e-6) << " ms";
  return {ok, os.str()};
}

// Informational: the Theorem schedule on the quadratic demo.
std::string theorem_info(const fs::path& out) {
  ExperimentConfig cfg = bundled("quadratic_demo.json", out);
  cfg.engine.hp.step.kind = StepPolicyKind::kTheorem;
  cfg.engine.hp.rho1 = 0.5;
  cfg.engine.hp.rho2 = 0.5;
  Problem prob = build_problem(cfg);
  const auto res = run_experiment(cfg, prob).result;
  std::ostringstream os;
  os << "info: Theorem schedule on quadratic demo, gap " << res.final_gap << " after "
     << res.iterations << " iterations";
  return os.str();
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const fs::path out = testing::scratch_dir("acceptance");
  struct Criterion {
    int id;
    double limit_s;  // 0: no runtime bound
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, 60, subproblem_oracles},
      {2, 30, gradient_blocks},
      {3, 30, [&] { return quadratic_convergence(out / "c3"); }},
      {4, 300, [&] { return gamma_trend(out / "c4"); }},
      {5, 300, [&] { return ease_efficiency(out / "c5"); }},
      {6, 120, [&] { return asynchrony(out / "c6"); }},
      {7, 120, [&] { return protocol_fuzz(out / "c7"); }},
      {8, 0, [&] { return determinism(out / "c8"); }},
      {9, 300, [&] { return baseline_ordering(out / "c9"); }},
      {10, 0, complexity_trend},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %d: %s %s [%.2fs%s]\n", c.id, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, in_time ? "" : " over limit");
    std::fflush(stdout);
  }
  try {
    std::printf("%s\n", theorem_info(out / "info").c_str());
  } catch (const std::exception& e) {
    std::printf("info: Theorem schedule run threw: %s\n", e.what());
  }
  fs::remove_all(out);
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
