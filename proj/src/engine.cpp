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

#include "aspire/engine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "aspire/lagrangian.hpp"

namespace aspire {

void validate(const QuorumPolicy& policy, std::size_t workers) {
  if (policy.mode == QuorumMode::kFixed) {
    if (policy.s < 1 || policy.s > workers) {
      throw InvalidArgument("fixed quorum S must lie in [1, N]");
    }
    return;
  }
  if (workers < 2) throw InvalidArgument("adaptive quorum needs N >= 2");
  if (policy.s < 1 || policy.s >= workers) {
    throw InvalidArgument("adaptive quorum s must lie in [1, N)");
  }
  if (!(policy.beta1 > 0.0)) throw InvalidArgument("beta1 must be > 0");
  if (!(policy.smoothing > 0.0 && policy.smoothing <= 1.0)) {
    throw InvalidArgument("delay smoothing must lie in (0, 1]");
  }
}

std::optional<double> delay_spread(
    std::span<const std::optional<double>> estimates) {
  if (estimates.empty()) return std::nullopt;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& e : estimates) {
    if (!e) return std::nullopt;
    lo = std::min(lo, *e);
    hi = std::max(hi, *e);
  }
  return hi - lo;
}

std::size_t next_quorum(const QuorumPolicy& policy,
                        std::span<const std::optional<double>> estimates) {
  if (policy.mode == QuorumMode::kFixed) return policy.s;
  const auto spread = delay_spread(estimates);
  if (!spread || *spread <= policy.beta1) return policy.s;
  return estimates.size();
}

double DelayModel::multiplier(std::size_t worker, double time) const {
  double m = 1.0;
  for (const auto& w : stragglers) {
    if (w.worker == worker && time >= w.t_start && time < w.t_end) {
      m *= w.multiplier;
    }
  }
  return m;
}

double DelayModel::sample(std::size_t worker, double time, Rng& rng) const {
  const double u = rng.uniform();
  const double b = base.empty() ? 1.0 : base[worker];
  return b * multiplier(worker, time) * (1.0 + jitter * (2.0 * u - 1.0));
}

void validate(const DelayModel& model, std::size_t workers) {
  if (!model.base.empty() && model.base.size() != workers) {
    throw InvalidArgument("delay base must list one value per worker");
  }
  for (double b : model.base) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw InvalidArgument("worker delays must be positive");
    }
  }
  if (!(model.jitter >= 0.0 && model.jitter < 1.0)) {
    throw InvalidArgument("delay jitter must lie in [0, 1)");
  }
  for (const auto& w : model.stragglers) {
    if (w.worker >= workers) throw InvalidArgument("straggler worker out of range");
    if (!(w.t_start < w.t_end)) {
      throw InvalidArgument("straggler window must have t_start < t_end");
    }
    if (!(w.multiplier > 0.0)) {
      throw InvalidArgument("straggler multiplier must be positive");
    }
  }
}

std::vector<std::size_t> enforce_staleness(std::span<const std::size_t> last,
                                           std::size_t t, std::size_t tau) {
  std::vector<std::size_t> forced;
  for (std::size_t j = 0; j < last.size(); ++j) {
    if (t >= last[j] && t - last[j] + 1 >= tau) forced.push_back(j);
  }
  return forced;
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kEase: return "ease";
    case RunMode::kCuttingPlane: return "cp";
    case RunMode::kFixedWeights: return "fixed_weights";
  }
  return "unknown";
}

RunMode parse_run_mode(const std::string& name) {
  if (name == "ease") return RunMode::kEase;
  if (name == "cp") return RunMode::kCuttingPlane;
  if (name == "fixed_weights") return RunMode::kFixedWeights;
  throw InvalidArgument("unknown run mode '" + name + "'");
}

namespace {

struct Snapshot {
  std::size_t worker = 0;
  Vec w, g, phi, z;
  double weight = 0.0;
  double step = 0.0;
  double time = 0.0;  // simulated dispatch time
};

struct Update {
  std::size_t worker = 0;
  Vec w;
  double f = 0.0;  // reported (possibly inflated) loss
  Vec g;
  double dispatched = 0.0;
  double arrival = 0.0;
};

Update compute_update(const Snapshot& s, const LocalObjective& obj,
                      const HyperParams& hp) {
  Update u;
  u.worker = s.worker;
  u.w = local_w_step(s.w, s.g, s.phi, s.z, s.weight, hp.kappa1, s.step,
                     hp.radii.w);
  auto [f, g] = obj.loss_and_grad(u.w);
  u.f = f * obj.report_scale();
  u.g = std::move(g);
  u.dispatched = s.time;
  return u;
}

class Master {
 public:
  Master(const EngineConfig& cfg, const std::vector<LocalObjective>& objs,
         const AttackProbe* probe)
      : cfg_(cfg),
        objs_(objs),
        probe_(probe),
        n_(objs.size()),
        sched_(cfg.hp, objs.size()),
        p_bar_(nominal_weight(cfg.hp, objs.size())) {
    state_ = ProblemState::zeros(n_, objs.front().dim());
    f_.resize(n_);
    g_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      auto [f, g] = objs_[j].loss_and_grad(state_.w[j]);
      f_[j] = f * objs_[j].report_scale();
      g_[j] = std::move(g);
    }
    last_.assign(n_, 0);
    est_.assign(n_, std::nullopt);
    result_.planes = CuttingPlaneSet(cfg.hp.max_planes);
    auto& planes = result_.planes;
    if (cfg.mode == RunMode::kFixedWeights) {
      Vec a = cfg.fixed_weights.empty()
                  ? Vec(n_, 1.0 / static_cast<double>(n_))
                  : cfg.fixed_weights;
      for (double& x : a) x -= p_bar_;
      planes.add(std::move(a), 0);
      planes.set_dual(0, 1.0);
    } else {
      // A^0 holds the plane generated at the initial point.
      planes.add(generate_plane(cfg.ambiguity, f_, p_bar_), 0);
      ++result_.plane_solves;
    }
    current_s_ = next_quorum(cfg.quorum, est_);
  }

  bool done() const { return done_; }
  std::size_t iteration() const { return t_; }

  Snapshot snapshot(std::size_t j, double now) const {
    Snapshot s;
    s.worker = j;
    s.w = state_.w[j];
    s.g = g_[j];
    s.phi = state_.phi[j];
    s.z = state_.z;
    s.weight = result_.planes.weight(j, p_bar_);
    s.step = sched_.eta(t_, result_.planes.size());
    s.time = now;
    return s;
  }

  // Quorum size in force for the coming iteration.
  std::size_t quorum(double now) {
    const std::size_t s = std::min(next_quorum(cfg_.quorum, est_), n_);
    if (s != current_s_) {
      result_.switches.push_back({t_, now, current_s_, s, delay_spread(est_)});
      current_s_ = s;
    }
    return s;
  }

  std::vector<std::size_t> forced() const {
    return enforce_staleness(last_, t_, cfg_.hp.staleness);
  }

  // One master iteration with the accepted updates (any order).
  void iterate(std::vector<Update> accepted, double now) {
    const auto& hp = cfg_.hp;
    const std::size_t t = t_;
    std::sort(accepted.begin(), accepted.end(),
              [](const Update& a, const Update& b) { return a.worker < b.worker; });
    std::vector<std::size_t> active;
    std::size_t staleness = 0;
    if (accepted.size() < current_s_) violation("quorum below S at t=" + std::to_string(t));
    for (auto& u : accepted) {
      const std::size_t j = u.worker;
      active.push_back(j);
      const std::size_t stale = t - last_[j];
      staleness = std::max(staleness, stale);
      if (stale > hp.staleness) violation("staleness bound broken at t=" + std::to_string(t));
      const double observed = u.arrival - u.dispatched;
      const double a = cfg_.quorum.smoothing;
      est_[j] = est_[j] ? (1.0 - a) * *est_[j] + a * observed : observed;
      state_.w[j] = std::move(u.w);
      f_[j] = u.f;
      g_[j] = std::move(u.g);
    }
    result_.max_staleness = std::max(result_.max_staleness, staleness);

    auto& planes = result_.planes;
    const bool fixed = cfg_.mode == RunMode::kFixedWeights;
    const double eta = sched_.eta(t, planes.size());
    step_z(state_, hp, eta);
    step_h(state_, planes, hp, sched_.eta_h(t, planes.size()));
    if (!fixed) {
      step_lambda(planes, state_, hp, f_, p_bar_, sched_.c1(t));
      planes.record_duals();
    }
    step_phi(state_, hp, active, sched_.c2(t));
    if (!fixed) {
      const PlaneMode pm = cfg_.mode == RunMode::kEase ? PlaneMode::kEase
                                                        : PlaneMode::kCuttingPlane;
      const PlaneUpdate upd =
          maybe_update_planes(planes, cfg_.ambiguity, f_, t, hp, pm);
      if (upd.gated) ++result_.plane_solves;
    }
    state_.t = t + 1;

    GapSteps steps;
    steps.alpha_w = steps.eta_z = sched_.eta(t, planes.size());
    steps.eta_h = sched_.eta_h(t, planes.size());
    steps.rho1 = hp.rho1;
    steps.rho2 = hp.rho2;
    steps.include_lambda = !fixed;
    const GapReport gap =
        stationarity_gap({state_, planes, hp, f_, g_, p_bar_}, steps, t);

    RunRecord rec;
    rec.t = t;
    rec.time = now;
    rec.gap = gap.total;
    rec.planes = planes.size();
    rec.quorum = current_s_;
    rec.f = f_;
    rec.loss_worst = *std::max_element(f_.begin(), f_.end());
    rec.active = active;
    rec.staleness = staleness;
    rec.duals = planes.duals();
    rec.spread = delay_spread(est_);

    if (cfg_.check_invariants) {
      for (auto& issue : check_state(state_, rec.duals, hp.radii)) {
        violation(issue + " at t=" + std::to_string(t));
      }
      if (planes.size() > hp.max_planes) violation("plane cap exceeded");
    }
    for (std::size_t j : active) last_[j] = t + 1;
    ++t_;
    result_.iterations = t_;
    result_.sim_time = now;
    result_.final_gap = gap.total;

    const bool converged = gap.total <= cfg_.eps;
    if (converged) {
      result_.converged = true;
      result_.t_eps = t;
      result_.time_eps = now;
    }
    done_ = converged || t_ >= cfg_.max_iters;
    if (done_ && probe_ && probe_->backdoor) {
      rec.attack_rate =
          success_attack_rate(*probe_->backdoor, state_.z, probe_->target);
      result_.attack_rate = rec.attack_rate;
    }
    result_.log.append(std::move(rec));
  }

  RunResult finish() {
    result_.state = state_;
    result_.f = f_;
    result_.planes_distinct = result_.planes.distinct_added();
    return std::move(result_);
  }

 private:
  void violation(std::string what) {
    ++result_.invariant_violations;
    if (result_.violation_samples.size() < 16) {
      result_.violation_samples.push_back(std::move(what));
    }
  }

  const EngineConfig& cfg_;
  const std::vector<LocalObjective>& objs_;
  const AttackProbe* probe_;
  std::size_t n_;
  Schedules sched_;
  double p_bar_;
  ProblemState state_;
  Vec f_;
  std::vector<Vec> g_;
  std::vector<std::size_t> last_;  // iteration of each worker's snapshot
  std::vector<std::optional<double>> est_;
  std::size_t current_s_ = 1;
  std::size_t t_ = 0;
  bool done_ = false;
  RunResult result_;
};

// The S earliest arrivals (ties by index) plus every forced worker.
std::vector<std::size_t> select_quorum(const std::vector<double>& arrival,
                                       const std::vector<bool>& available,
                                       std::size_t s,
                                       const std::vector<std::size_t>& forced) {
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < arrival.size(); ++j) {
    if (available[j]) order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (arrival[a] != arrival[b]) return arrival[a] < arrival[b];
    return a < b;
  });
  std::vector<bool> chosen(arrival.size(), false);
  for (std::size_t k = 0; k < std::min(s, order.size()); ++k) chosen[order[k]] = true;
  for (std::size_t j : forced) chosen[j] = true;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    if (chosen[j]) out.push_back(j);
  }
  return out;
}

RunResult run_simulated(const EngineConfig& cfg,
                        const std::vector<LocalObjective>& objs,
                        const AttackProbe* probe) {
  const std::size_t n = objs.size();
  Master master(cfg, objs, probe);
  Rng rng(cfg.seed);
  std::vector<Update> inflight(n);
  std::vector<double> arrival(n);
  const std::vector<bool> all(n, true);
  auto dispatch = [&](std::size_t j, double now) {
    inflight[j] = compute_update(master.snapshot(j, now), objs[j], cfg.hp);
    arrival[j] = inflight[j].arrival = now + cfg.delay.sample(j, now, rng);
  };
  for (std::size_t j = 0; j < n; ++j) dispatch(j, 0.0);
  double now = 0.0;
  while (!master.done()) {
    const std::size_t s = master.quorum(now);
    const auto chosen = select_quorum(arrival, all, s, master.forced());
    std::vector<Update> accepted;
    for (std::size_t j : chosen) {
      now = std::max(now, arrival[j]);
      accepted.push_back(inflight[j]);
    }
    master.iterate(std::move(accepted), now);
    if (master.done()) break;
    for (std::size_t j : chosen) dispatch(j, now);
  }
  return master.finish();
}

template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }
  T pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T v = std::move(queue_.front());
    queue_.pop_front();
    return v;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

RunResult run_threaded(const EngineConfig& cfg,
                       const std::vector<LocalObjective>& objs,
                       const AttackProbe* probe) {
  using Clock = std::chrono::steady_clock;
  const std::size_t n = objs.size();
  Master master(cfg, objs, probe);
  const auto start = Clock::now();
  auto sim_now = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count() /
           cfg.time_scale;
  };
  std::vector<Channel<std::optional<Snapshot>>> inbox(n);
  Channel<Update> outbox;
  std::vector<std::thread> threads;
  for (std::size_t j = 0; j < n; ++j) {
    threads.emplace_back([&, j] {
      Rng rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (j + 1));
      while (auto snap = inbox[j].pop()) {
        Update u = compute_update(*snap, objs[j], cfg.hp);
        const double delay = cfg.delay.sample(j, snap->time, rng);
        std::this_thread::sleep_until(
            start + std::chrono::duration_cast<Clock::duration>(
                        std::chrono::duration<double>((snap->time + delay) *
                                                      cfg.time_scale)));
        u.arrival = sim_now();
        outbox.push(std::move(u));
      }
    });
  }
  for (std::size_t j = 0; j < n; ++j) inbox[j].push(master.snapshot(j, 0.0));

  std::vector<double> arrival(n, 0.0);
  std::vector<bool> pending(n, false);
  std::vector<Update> held(n);
  std::size_t outstanding = n;
  auto receive = [&] {
    Update u = outbox.pop();
    --outstanding;
    const std::size_t j = u.worker;
    arrival[j] = u.arrival;
    pending[j] = true;
    held[j] = std::move(u);
  };
  double now = 0.0;
  while (!master.done()) {
    const std::size_t s = master.quorum(now);
    const auto forced = master.forced();
    auto ready = [&] {
      const auto count = static_cast<std::size_t>(
          std::count(pending.begin(), pending.end(), true));
      return count >= s && std::all_of(forced.begin(), forced.end(),
                                       [&](std::size_t j) { return pending[j]; });
    };
    while (!ready()) receive();
    const auto chosen = select_quorum(arrival, pending, s, forced);
    std::vector<Update> accepted;
    for (std::size_t j : chosen) {
      accepted.push_back(std::move(held[j]));
      pending[j] = false;
    }
    now = std::max(now, sim_now());
    master.iterate(std::move(accepted), now);
    if (master.done()) break;
    for (std::size_t j : chosen) {
      inbox[j].push(master.snapshot(j, now));
      ++outstanding;
    }
  }
  for (std::size_t j = 0; j < n; ++j) inbox[j].push(std::nullopt);
  while (outstanding > 0) receive();
  for (auto& th : threads) th.join();
  return master.finish();
}

}  // namespace

RunResult run(const EngineConfig& config,
              const std::vector<LocalObjective>& objectives,
              const AttackProbe* probe) {
  const std::size_t n = objectives.size();
  if (n == 0) throw InvalidArgument("run needs at least one worker");
  const std::size_t dim = objectives.front().dim();
  for (const auto& o : objectives) {
    if (o.dim() != dim) throw DimensionMismatch("workers disagree on model size");
  }
  validate(config.hp, n);
  validate(config.quorum, n);
  validate(config.delay, n);
  if (config.mode == RunMode::kFixedWeights) {
    if (!config.fixed_weights.empty()) {
      if (config.fixed_weights.size() != n) {
        throw DimensionMismatch("fixed weights need one entry per worker");
      }
      double sum = 0.0;
      for (double x : config.fixed_weights) {
        if (!(x >= 0.0)) throw InvalidArgument("fixed weights must be >= 0");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("fixed weights must sum to one");
      }
    }
  } else {
    validate(config.ambiguity);
    if (config.ambiguity.workers() != n) {
      throw DimensionMismatch("ambiguity set size must equal the worker count");
    }
  }
  if (!(config.eps >= 0.0)) throw InvalidArgument("eps must be >= 0");
  if (config.max_iters == 0) throw InvalidArgument("max_iters must be >= 1");
  for (const auto& note : advisory_checks(config.hp, n)) spdlog::debug("{}", note);
  if (config.execution == Execution::kThreaded) {
    if (!(config.time_scale > 0.0)) throw InvalidArgument("time_scale must be > 0");
    return run_threaded(config, objectives, probe);
  }
  return run_simulated(config, objectives, probe);
}

}  // namespace aspire
