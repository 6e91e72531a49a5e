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

// End-to-end experiment drivers behind the CLI subcommands.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aspire/config.hpp"
#include "aspire/engine.hpp"
#include "aspire/metrics.hpp"

namespace aspire {

struct RunSummary {
  double final_gap = 0.0;
  bool converged = false;
  std::optional<std::size_t> t_eps;
  std::optional<double> time_eps;
  std::size_t iterations = 0;
  double sim_time = 0.0;
  std::size_t planes_final = 0;
  std::size_t planes_distinct = 0;
  std::size_t plane_solves = 0;
  std::size_t max_staleness = 0;
  std::size_t invariant_violations = 0;
  std::size_t quorum_switches = 0;
  // Evaluated at the consensus model: true training losses and held-out
  // accuracies per worker.
  WorstCaseMetrics metrics;
  Vec losses;
  Vec accuracies;
  std::optional<double> attack_rate;
};

struct ExperimentRun {
  RunResult result;
  RunSummary summary;
};

ExperimentRun run_experiment(const ExperimentConfig& config,
                             const Problem& problem);

std::string summary_to_json(const RunSummary& summary);

// Writes runlog.jsonl, runlog.csv and summary.json into config.output_dir.
RunSummary cmd_run(ExperimentConfig config);

struct SweepRow {
  double gamma = 0.0;
  double loss_worst = 0.0;
  double loss_mean = 0.0;
};

// Duplicate gammas are dropped (first occurrence kept) with a warning.
// Writes sweep.csv.
std::vector<SweepRow> sweep_gamma(ExperimentConfig config, Vec gammas);

struct CompareRow {
  std::string mode;    // ease | cp
  std::string quorum;  // S=1 | S=N | adaptive
  std::size_t planes_used = 0;
  std::optional<double> time_to_eps;
  std::optional<std::size_t> t_eps;
  std::size_t plane_solves = 0;
  double final_gap = 0.0;
};

// {ease, cp} x {S=1, S=N, adaptive} on one seed. Writes compare.csv.
std::vector<CompareRow> compare_modes(ExperimentConfig config);

struct BaselineRow {
  std::string mode;  // aspire_ease | mix_even
  WorstCaseMetrics metrics;
  std::optional<double> attack_rate;
  double final_gap = 0.0;
};

// The configured DRO run next to the fixed-weights (Mix_Even) run, whose
// weights come from ExperimentConfig::fixed_weights. Writes baseline.csv.
std::vector<BaselineRow> baseline(ExperimentConfig config);

// Writes bench.csv into `out_dir`.
std::vector<BenchRow> bench_uncertainty(const std::vector<AmbiguityKind>& kinds,
                                        const std::vector<std::size_t>& sizes,
                                        std::size_t repetitions,
                                        std::uint64_t seed,
                                        const std::string& out_dir);

}  // namespace aspire
