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

// Ambiguity sets over worker weights. Each one answers the same question:
// given the current per-worker losses f, which admissible distribution p
// maximizes sum_j (p_j - p_bar) f_j? The maximizer becomes a cutting plane.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aspire/core.hpp"

namespace aspire {

enum class AmbiguityKind {
  kCDNorm,
  kBox,
  kEllipsoid,
  kPolyhedron,
  kKL,
  kWasserstein1,
};

std::string to_string(AmbiguityKind kind);
// Accepts "cdnorm", "box", "ellipsoid", "polyhedron", "kl", "wasserstein1".
AmbiguityKind parse_ambiguity_kind(const std::string& name);

struct AmbiguitySpec {
  AmbiguityKind kind = AmbiguityKind::kCDNorm;
  Vec q;        // prior on the simplex (CDNorm, Ellipsoid, KL, Wasserstein1)
  Vec p_tilde;  // CDNorm per-worker deviation caps, > 0
  double budget = 0.0;  // CDNorm Gamma
  Vec lower;            // Box
  Vec upper;            // Box
  Eigen::MatrixXd shape;   // Ellipsoid Q, symmetric positive definite
  double radius = 0.0;     // Ellipsoid / KL / Wasserstein1 beta
  Eigen::MatrixXd d_rows;  // Polyhedron D (L_in x N)
  Eigen::VectorXd d_rhs;   // Polyhedron c
  // Wasserstein1 ground cost; |i - j| when empty.
  Eigen::MatrixXd ground_cost;

  std::size_t workers() const;

  static AmbiguitySpec cdnorm(Vec q, Vec p_tilde, double budget);
  static AmbiguitySpec box(Vec lower, Vec upper);
  static AmbiguitySpec ellipsoid(Vec q, Eigen::MatrixXd shape, double radius);
  static AmbiguitySpec polyhedron(Eigen::MatrixXd d_rows,
                                  Eigen::VectorXd d_rhs);
  static AmbiguitySpec kl(Vec q, double radius);
  static AmbiguitySpec wasserstein1(Vec q, double radius);
};

// Throws InvalidArgument (bad parameters) or Infeasible (empty set that is
// detectable without solving).
void validate(const AmbiguitySpec& spec);

struct WorstCase {
  Vec p;
  double value = 0.0;  // sum_j (p_j - p_bar) f_j
  // Set when the ellipsoid closed form left the nonnegative orthant and the
  // iterative fallback produced the point.
  bool approximate = false;
};

WorstCase solve_cdnorm(const AmbiguitySpec& spec, std::span<const double> f,
                       double p_bar);
WorstCase solve_box(const AmbiguitySpec& spec, std::span<const double> f,
                    double p_bar);
WorstCase solve_ellipsoid(const AmbiguitySpec& spec, std::span<const double> f,
                          double p_bar);
WorstCase solve_polyhedron(const AmbiguitySpec& spec,
                           std::span<const double> f, double p_bar);
WorstCase solve_kl(const AmbiguitySpec& spec, std::span<const double> f,
                   double p_bar);
WorstCase solve_wasserstein1(const AmbiguitySpec& spec,
                             std::span<const double> f, double p_bar);

// Dispatches on spec.kind.
WorstCase solve_worst_case(const AmbiguitySpec& spec,
                           std::span<const double> f, double p_bar);

// Largest constraint violation of p against the set (simplex included).
double constraint_residual(const AmbiguitySpec& spec,
                           std::span<const double> p);

// KL(p || q) with the 0 log 0 = 0 convention.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Exact one-dimensional earth mover's distance under |i - j| ground cost.
double emd_line(std::span<const double> p, std::span<const double> q);

struct BenchRow {
  AmbiguityKind kind;
  std::size_t n = 0;
  double median_ns = 0.0;
  double p95_ns = 0.0;
};

// Representative instance of `kind` with n workers, used by the benchmark.
AmbiguitySpec bench_instance(AmbiguityKind kind, std::size_t n,
                             std::uint64_t seed);

std::vector<BenchRow> uncertainty_bench(std::span<const AmbiguityKind> kinds,
                                        std::span<const std::size_t> sizes,
                                        std::size_t repetitions,
                                        std::uint64_t seed);

void write_bench_csv(const std::vector<BenchRow>& rows,
                     const std::string& path);

}  // namespace aspire
