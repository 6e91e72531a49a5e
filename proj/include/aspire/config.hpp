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

// JSON experiment configuration. The schema is documented in
// docs/config.md; unknown keys are rejected so typos surface early.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aspire/engine.hpp"
#include "aspire/objectives.hpp"

namespace aspire {

struct CsvSource {
  std::string path;  // resolved against the config file's directory
  CsvSchema schema;
  double mu = 1e-3;
  int classes = 0;
  double test_fraction = 0.0;  // trailing share of each worker held out
};

struct ObjectiveConfig {
  std::string kind = "quadratic";  // quadratic | synthetic | csv
  std::vector<Vec> centers;        // quadratic
  Vec curvatures;                  // quadratic; one value or one per worker
  ScenarioSpec synthetic;
  std::size_t workers = 0;  // synthetic
  std::optional<std::uint64_t> data_seed;  // defaults to the run seed
  CsvSource csv;
};

struct ExperimentConfig {
  EngineConfig engine;
  ObjectiveConfig objective;
  std::optional<MaliciousSpec> malicious;
  std::string output_dir = "out";
  bool lipschitz_auto = false;
  // Weights of the fixed-weights mode and the baseline: "prior" (q of the
  // ambiguity set), "uniform", or "list" (engine.fixed_weights as given).
  std::string fixed_weights = "prior";
  // Ambiguity section kept as JSON text until the worker count is known.
  std::string ambiguity_json;
};

// Throws ConfigError (bad content) or IoError (unreadable file).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text,
                              const std::string& base_dir = ".");

struct Problem {
  WorkerData data;
  std::optional<LocalObjective> backdoor;
  int target_label = 1;
};

// Materializes objectives and resolves config fields that depend on them
// (worker count, uniform priors, automatic Lipschitz estimate).
Problem build_problem(ExperimentConfig& config);

// Parses an "ambiguity" section on its own, for `workers` workers.
AmbiguitySpec parse_ambiguity_json(const std::string& json_text,
                                   std::size_t workers);

}  // namespace aspire
