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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aspire/lagrangian.hpp"
#include "aspire/objectives.hpp"

namespace aspire {

// Step sizes used to scale the projected-gradient residuals.
struct GapSteps {
  double alpha_w = 1.0;
  double eta_z = 1.0;
  double eta_h = 1.0;
  double rho1 = 1.0;
  double rho2 = 1.0;
  // Fixed-weight runs hold lambda constant; its block is then omitted.
  bool include_lambda = true;
};

struct GapReport {
  std::size_t t = 0;
  Vec w_blocks;  // ||residual|| per worker
  double z_block = 0.0;
  double h_block = 0.0;
  Vec lambda_blocks;
  Vec phi_blocks;
  double total = 0.0;

  // Sum of squared blocks; equals total^2 up to rounding.
  double block_sum_squares() const;
};

// Primal blocks are (1/step)(x - P(x - step grad)), dual blocks
// (1/rho)(x - P(x + rho grad)), all on the unregularized Lagrangian.
GapReport stationarity_gap(const LagrangianContext& ctx, const GapSteps& steps,
                           std::size_t t);

bool is_eps_stationary(const GapReport& report, double eps);

struct WorstCaseMetrics {
  double loss_worst = 0.0;
  double loss_mean = 0.0;
  double acc_worst = 0.0;
  double acc_std = 0.0;  // population std of accuracies
};

// Accuracies may be empty (quadratic objectives); the accuracy fields are
// then NaN.
WorstCaseMetrics worst_case_metrics(std::span<const double> losses,
                                    std::span<const double> accuracies);

// Fraction of the backdoor set classified as `target`. Throws
// InvalidArgument when the set is empty.
double success_attack_rate(const LocalObjective& backdoor,
                           std::span<const double> w, int target);

struct RunRecord {
  std::size_t t = 0;
  double time = 0.0;  // simulated seconds
  double gap = 0.0;
  std::size_t planes = 0;
  std::size_t quorum = 0;  // S in force for this iteration
  Vec f;                   // master's view of the reported losses
  double loss_worst = 0.0;
  std::vector<std::size_t> active;
  std::size_t staleness = 0;  // max t - t~_j over applied updates
  Vec duals;
  std::optional<double> spread;  // max - min delay estimate
  std::optional<double> attack_rate;
};

class RunLog {
 public:
  void append(RunRecord record);
  const std::vector<RunRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // First t with gap <= eps.
  std::optional<std::size_t> first_eps_index(double eps) const;

  std::string to_jsonl() const;
  void write_jsonl(const std::string& path) const;
  static RunLog read_jsonl(const std::string& path);
  // Columns t, time_s, gap, planes, S, loss_worst.
  void write_csv(const std::string& path) const;

 private:
  std::vector<RunRecord> records_;
};

}  // namespace aspire
