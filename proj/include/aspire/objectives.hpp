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

// Per-worker smooth objectives and the synthetic / CSV data sources behind
// them.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aspire/core.hpp"

namespace aspire {

enum class ObjectiveKind { kQuadratic, kSoftmax };

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class LocalObjective {
 public:
  // (curvature / 2) ||w - center||^2
  static LocalObjective quadratic(Vec center, double curvature);

  // Mean cross-entropy of a linear softmax model plus (mu / 2) ||w||^2.
  // `features` is samples x d; a bias column is appended internally, so the
  // model has classes x (d + 1) weights stored row-major. Labels are 1..c.
  static LocalObjective softmax(Eigen::MatrixXd features,
                                std::vector<int> labels, int classes,
                                double mu);

  ObjectiveKind kind() const { return kind_; }
  std::size_t dim() const;
  std::size_t samples() const;
  int classes() const { return classes_; }
  std::size_t feature_dim() const;
  double curvature() const { return curvature_; }
  const Vec& center() const { return center_; }
  double mu() const { return mu_; }
  // Raw features without the bias column.
  Eigen::MatrixXd features() const;
  const std::vector<int>& labels() const { return labels_; }

  // Multiplier applied to the loss a worker reports to the master. Only the
  // reported value changes; gradients always use the true loss.
  double report_scale() const { return report_scale_; }
  void set_report_scale(double s);

  double loss(std::span<const double> w) const;
  Vec grad(std::span<const double> w) const;
  std::pair<double, Vec> loss_and_grad(std::span<const double> w) const;

  // Lipschitz constant of the gradient: the curvature, or
  // 0.5 ||X~||_F^2 / n + mu for softmax.
  double lipschitz() const;

  // Predicted label (1..c) of sample `row`; ties go to the lower class.
  int predict(std::span<const double> w, std::size_t row) const;
  // Fraction of samples classified correctly; NaN for quadratics.
  double accuracy(std::span<const double> w) const;

 private:
  void check_dim(std::span<const double> w) const;

  ObjectiveKind kind_ = ObjectiveKind::kQuadratic;
  Vec center_;
  double curvature_ = 1.0;
  RowMatrix x_;  // samples x (d + 1), last column all ones
  std::vector<int> labels_;
  int classes_ = 0;
  double mu_ = 0.0;
  double report_scale_ = 1.0;
};

// Largest ||grad f(w) - grad f(w')|| / ||w - w'|| over `pairs` random pairs
// drawn from the box [-radius, radius]^p, maximised over the objectives.
double estimate_lipschitz(const std::vector<LocalObjective>& objectives,
                          std::uint64_t seed, std::size_t pairs = 64,
                          double radius = 1.0);

struct ScenarioSpec {
  ObjectiveKind kind = ObjectiveKind::kSoftmax;
  std::string split = "skew";  // "skew" or "one_class" (softmax only)
  double skew = 0.0;           // 0 = identical workers
  std::size_t dim = 2;         // model dim (quadratic) or feature dim
  int classes = 3;
  std::size_t samples = 60;       // training samples per worker
  std::size_t test_samples = 60;  // held-out samples per worker
  double curvature = 1.0;
  double spread = 1.0;      // scale of quadratic center offsets
  double mu = 1e-3;
  double separation = 2.0;  // class-mean scale
  double noise = 1.0;       // within-class feature noise
  double shift = 0.0;       // per-worker covariate shift, scaled by skew
};

struct WorkerData {
  std::vector<LocalObjective> train;
  std::vector<LocalObjective> test;
};

// Deterministic per seed. Quadratic centers are base + skew * spread * e_j;
// softmax workers draw their preferred class j mod c with probability skew
// and a uniform class otherwise ("one_class" gives each worker one label).
WorkerData make_scenario(const ScenarioSpec& spec, std::size_t workers,
                         std::uint64_t seed);
std::vector<LocalObjective> make_heterogeneous(const ScenarioSpec& spec,
                                               std::size_t workers,
                                               std::uint64_t seed);

struct MaliciousSpec {
  std::size_t worker = 0;
  double fraction = 0.0;   // share of the attacker's samples poisoned
  double inflation = 1.0;  // reported-loss multiplier, >= 1
  int target_label = 1;
  double trigger_value = 3.0;
};

struct MaliciousOutcome {
  WorkerData data;
  // Clean workers' held-out samples (true label != target) with the trigger
  // switched on. Empty when there is nothing to evaluate.
  std::optional<LocalObjective> backdoor;
};

// Appends a trigger feature (0 everywhere), then on the attacker replaces
// round(fraction * n) samples by triggered copies relabelled to the target.
// With fraction 0 and inflation 1 the data is returned untouched.
MaliciousOutcome apply_malicious(const WorkerData& data,
                                 const MaliciousSpec& spec,
                                 std::uint64_t seed);

struct CsvSchema {
  std::vector<std::string> feature_cols;
  std::string label_col;
  std::string worker_col;
  // When set, worker ids must be integers in [0, num_workers) and every
  // worker must own at least one row.
  std::optional<std::size_t> num_workers;
};

struct IngestResult {
  std::vector<LocalObjective> objectives;
  std::vector<std::string> worker_ids;
  Vec mean;
  Vec stddev;
  int classes = 0;
};

// Reads a headered, comma-separated file. Features are standardized with
// the pooled mean / population std. `classes` = 0 infers max label.
IngestResult ingest_csv(const std::string& path, const CsvSchema& schema,
                        double mu, int classes = 0);

// Writes softmax objectives back out with columns f0..f{d-1}, label, worker.
void write_dataset_csv(const std::string& path,
                       const std::vector<LocalObjective>& objectives);

}  // namespace aspire
