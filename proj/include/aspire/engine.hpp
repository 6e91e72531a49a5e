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

// Master-worker protocol. Workers compute their local step from the snapshot
// they were dispatched with; the master waits for a quorum, then runs the
// z / h / lambda / phi sweep and the plane maintenance.
//
// The default executor is a discrete-event simulation on a virtual clock and
// is fully deterministic. The threaded executor runs one std::thread per
// worker against the wall clock and exists for demonstration only.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aspire/core.hpp"
#include "aspire/ease.hpp"
#include "aspire/metrics.hpp"
#include "aspire/objectives.hpp"
#include "aspire/random.hpp"
#include "aspire/uncertainty.hpp"

namespace aspire {

enum class QuorumMode { kFixed, kAdaptive };

struct QuorumPolicy {
  QuorumMode mode = QuorumMode::kFixed;
  std::size_t s = 1;       // S for kFixed, the small quorum for kAdaptive
  double beta1 = 1.0;      // adaptive spread threshold
  double smoothing = 0.3;  // weight of a new delay observation
};

void validate(const QuorumPolicy& policy, std::size_t workers);

// kFixed: s. kAdaptive: s until every worker has a delay estimate, then s if
// max - min <= beta1 and N otherwise.
std::size_t next_quorum(const QuorumPolicy& policy,
                        std::span<const std::optional<double>> estimates);

// Max - min of the estimates, or nullopt while any is missing.
std::optional<double> delay_spread(
    std::span<const std::optional<double>> estimates);

struct StragglerWindow {
  std::size_t worker = 0;
  double t_start = 0.0;  // simulated seconds, half-open [t_start, t_end)
  double t_end = 0.0;
  double multiplier = 1.0;
};

struct DelayModel {
  Vec base;             // per-worker round-trip delay, > 0
  double jitter = 0.0;  // relative amplitude in [0, 1)
  std::vector<StragglerWindow> stragglers;

  double multiplier(std::size_t worker, double time) const;
  // Draws exactly one uniform from `rng` per call.
  double sample(std::size_t worker, double time, Rng& rng) const;
};

void validate(const DelayModel& model, std::size_t workers);

// Workers whose last activation is tau - 1 or more iterations old.
std::vector<std::size_t> enforce_staleness(std::span<const std::size_t> last,
                                           std::size_t t, std::size_t tau);

enum class RunMode { kEase, kCuttingPlane, kFixedWeights };
enum class Execution { kSimulated, kThreaded };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& name);

struct EngineConfig {
  HyperParams hp;
  AmbiguitySpec ambiguity;
  QuorumPolicy quorum;
  DelayModel delay;  // empty base means unit delays
  RunMode mode = RunMode::kEase;
  Execution execution = Execution::kSimulated;
  double time_scale = 1e-3;  // threaded: wall seconds per simulated second
  std::uint64_t seed = 0;
  std::size_t max_iters = 5000;
  double eps = 1e-4;
  Vec fixed_weights;  // kFixedWeights; empty means uniform
  bool check_invariants = false;
};

struct AttackProbe {
  const LocalObjective* backdoor = nullptr;
  int target = 1;
};

struct QuorumSwitch {
  std::size_t t = 0;
  double time = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
  std::optional<double> spread;
};

struct RunResult {
  RunLog log;
  ProblemState state;
  CuttingPlaneSet planes;
  Vec f;  // master's view of the reported losses
  double final_gap = 0.0;
  bool converged = false;
  std::optional<std::size_t> t_eps;
  std::optional<double> time_eps;
  std::size_t iterations = 0;
  double sim_time = 0.0;
  std::size_t plane_solves = 0;
  std::size_t planes_distinct = 0;
  std::size_t max_staleness = 0;
  std::size_t invariant_violations = 0;
  std::vector<std::string> violation_samples;
  std::vector<QuorumSwitch> switches;
  std::optional<double> attack_rate;
};

RunResult run(const EngineConfig& config,
              const std::vector<LocalObjective>& objectives,
              const AttackProbe* probe = nullptr);

}  // namespace aspire
