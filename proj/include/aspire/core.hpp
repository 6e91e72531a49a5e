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

// Domain types shared by every module: decision variables, hyperparameters,
// step-size / regularizer schedules and the box projections.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aspire/error.hpp"

namespace aspire {

using Vec = std::vector<double>;

// Radii of the projection sets: w and z live in an infinity-norm ball of
// radius `w`, h in [0, h], every plane dual in [0, lambda], every phi_j in an
// infinity-norm ball of radius `phi`.
struct Radii {
  double w = 10.0;
  double h = 1e3;
  double lambda = 1e2;
  double phi = 10.0;
};

enum class StepPolicyKind {
  // Step sizes and regularizers follow the iteration-complexity schedules:
  // c(t) = 1 / (rho (t+1)^(1/6)) floored, eta from the smoothness bound.
  kTheorem,
  // Constant eta, c1, c2 supplied by the user.
  kFixed,
};

struct StepPolicy {
  StepPolicyKind kind = StepPolicyKind::kTheorem;
  double eta = 0.05;
  // Epigraph step; the shared eta when unset.
  std::optional<double> eta_h;
  double c1 = 0.0;
  double c2 = 0.0;
};

struct HyperParams {
  double rho1 = 0.1;    // plane-dual ascent step
  double rho2 = 0.1;    // consensus-dual ascent step
  double kappa1 = 1.0;  // consensus penalty
  double lipschitz = 1.0;
  double gamma = 2.5;   // regularizer coupling constant, >= 2
  std::size_t max_planes = 16;
  std::size_t freeze_iter = 1000;  // T1: schedules and planes freeze here
  std::size_t staleness = 8;       // tau
  std::size_t plane_period = 5;    // k
  std::optional<double> nominal_weight;  // p-bar; 1/N when unset
  std::optional<double> c1_floor;
  std::optional<double> c2_floor;
  Radii radii;
  StepPolicy step;
};

// Throws InvalidArgument describing the first violated constraint.
void validate(const HyperParams& hp, std::size_t workers);

// Human-readable notes about paper bounds that are checked but not enforced.
std::vector<std::string> advisory_checks(const HyperParams& hp,
                                         std::size_t workers);

double nominal_weight(const HyperParams& hp, std::size_t workers);

// Raw step-size bound 2 / (L + rho1 A L^2 + rho2 N L^2
//   + 8 (A gamma L^2 / (rho1 c1^2) + N gamma L^2 / (rho2 c2^2))).
// `gamma` may be zero here (used to check degenerate limits); the coupling
// terms are dropped when gamma == 0 so c1 or c2 may then be zero too.
double theorem_step_size(double lipschitz, double rho1, double rho2,
                         std::size_t workers, std::size_t planes, double gamma,
                         double c1, double c2);

class Schedules {
 public:
  Schedules(const HyperParams& hp, std::size_t workers);

  double c1(std::size_t t) const;
  double c2(std::size_t t) const;
  // Primal step size shared by the w, z and h updates. Throws when
  // `planes` exceeds the plane cap.
  double eta(std::size_t t, std::size_t planes) const;
  // Step for h. Equal to eta() except under a fixed policy with eta_h set.
  double eta_h(std::size_t t, std::size_t planes) const;

  double c1_floor() const { return c1_floor_; }
  double c2_floor() const { return c2_floor_; }
  double frozen_eta() const { return frozen_eta_; }
  std::size_t workers() const { return workers_; }
  const HyperParams& params() const { return hp_; }

 private:
  HyperParams hp_;
  std::size_t workers_;
  double c1_floor_;
  double c2_floor_;
  double frozen_eta_;
};

struct ProblemState {
  std::vector<Vec> w;    // per-worker local models
  Vec z;                 // consensus model
  double h = 0.0;        // epigraph variable
  std::vector<Vec> phi;  // per-worker consensus duals
  std::size_t t = 0;

  static ProblemState zeros(std::size_t workers, std::size_t dim);
  std::size_t workers() const { return w.size(); }
  std::size_t dim() const { return z.size(); }
};

// Componentwise clamp to [-radius, radius].
Vec project_box(std::span<const double> v, double radius);
void project_box_inplace(std::span<double> v, double radius);
// Clamp to [0, radius].
double project_interval(double x, double radius);

// Returns a description of every violated box invariant; empty when the
// state (and the paired plane duals) lie inside their projection sets.
std::vector<std::string> check_state(const ProblemState& state,
                                     std::span<const double> duals,
                                     const Radii& radii);

}  // namespace aspire
