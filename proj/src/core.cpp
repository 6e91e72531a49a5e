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

#include "aspire/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aspire {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

double setting_c(double rho, std::size_t t) {
  return 1.0 / (rho * std::pow(static_cast<double>(t) + 1.0, 1.0 / 6.0));
}

}  // namespace

void validate(const HyperParams& hp, std::size_t workers) {
  require(workers >= 1, "at least one worker is required");
  require(hp.rho1 > 0.0, "rho1 must be positive");
  require(hp.rho2 > 0.0, "rho2 must be positive");
  require(hp.kappa1 > 0.0, "kappa1 must be positive");
  require(hp.lipschitz > 0.0, "lipschitz estimate must be positive");
  require(hp.gamma >= 2.0, "gamma must be >= 2");
  require(hp.max_planes >= 1, "max_planes (M) must be >= 1");
  require(hp.staleness >= 1, "staleness bound (tau) must be >= 1");
  require(hp.plane_period >= 1, "plane period (k) must be >= 1");
  if (hp.nominal_weight) {
    require(*hp.nominal_weight > 0.0 && *hp.nominal_weight <= 1.0,
            "nominal weight p_bar must lie in (0, 1]");
  }
  if (hp.c1_floor) require(*hp.c1_floor > 0.0, "c1 floor must be positive");
  if (hp.c2_floor) require(*hp.c2_floor > 0.0, "c2 floor must be positive");
  require(hp.radii.w > 0.0 && hp.radii.h > 0.0 && hp.radii.lambda > 0.0 &&
              hp.radii.phi > 0.0,
          "projection radii must be positive");
  if (hp.step.kind == StepPolicyKind::kFixed) {
    require(hp.step.eta > 0.0, "fixed step eta must be positive");
    if (hp.step.eta_h) require(*hp.step.eta_h > 0.0, "fixed step eta_h must be positive");
    require(hp.step.c1 >= 0.0 && hp.step.c2 >= 0.0,
            "fixed regularizers c1, c2 must be nonnegative");
  }
}

std::vector<std::string> advisory_checks(const HyperParams& hp,
                                         std::size_t workers) {
  std::vector<std::string> notes;
  Schedules sched(hp, workers);
  const double c10 = sched.c1(0);
  const double c20 = sched.c2(0);
  const double bound1 = 2.0 / (hp.lipschitz + 2.0 * c10);
  const double bound2 = 2.0 / (hp.lipschitz + 2.0 * c20);
  if (!(hp.rho1 < bound1)) {
    std::ostringstream os;
    os << "rho1=" << hp.rho1 << " violates rho1 < 2/(L+2c1(0))=" << bound1;
    notes.push_back(os.str());
  }
  if (!(hp.rho2 <= bound2)) {
    std::ostringstream os;
    os << "rho2=" << hp.rho2 << " violates rho2 <= 2/(L+2c2(0))=" << bound2;
    notes.push_back(os.str());
  }
  notes.emplace_back(
      "rho1 < 1/(15 tau k1 N L^2) not checked: k1 is not observable");
  return notes;
}

double nominal_weight(const HyperParams& hp, std::size_t workers) {
  return hp.nominal_weight.value_or(1.0 / static_cast<double>(workers));
}

double theorem_step_size(double lipschitz, double rho1, double rho2,
                         std::size_t workers, std::size_t planes, double gamma,
                         double c1, double c2) {
  const double l2 = lipschitz * lipschitz;
  const double a = static_cast<double>(planes);
  const double n = static_cast<double>(workers);
  double denom = lipschitz + rho1 * a * l2 + rho2 * n * l2;
  if (gamma != 0.0) {
    denom += 8.0 * (a * gamma * l2 / (rho1 * c1 * c1) +
                    n * gamma * l2 / (rho2 * c2 * c2));
  }
  return 2.0 / denom;
}

Schedules::Schedules(const HyperParams& hp, std::size_t workers)
    : hp_(hp), workers_(workers) {
  if (hp.step.kind == StepPolicyKind::kFixed) {
    c1_floor_ = hp.step.c1;
    c2_floor_ = hp.step.c2;
    frozen_eta_ = hp.step.eta;
    return;
  }
  // Default floors make the schedule continuous at the freeze point.
  c1_floor_ = hp.c1_floor.value_or(setting_c(hp.rho1, hp.freeze_iter));
  c2_floor_ = hp.c2_floor.value_or(setting_c(hp.rho2, hp.freeze_iter));
  frozen_eta_ =
      theorem_step_size(hp.lipschitz, hp.rho1, hp.rho2, workers,
                        hp.max_planes, hp.gamma, c1_floor_, c2_floor_);
}

double Schedules::c1(std::size_t t) const {
  if (hp_.step.kind == StepPolicyKind::kFixed) return hp_.step.c1;
  return std::max(setting_c(hp_.rho1, t), c1_floor_);
}

double Schedules::c2(std::size_t t) const {
  if (hp_.step.kind == StepPolicyKind::kFixed) return hp_.step.c2;
  return std::max(setting_c(hp_.rho2, t), c2_floor_);
}

double Schedules::eta(std::size_t t, std::size_t planes) const {
  if (planes > hp_.max_planes) {
    throw InvalidArgument("plane count exceeds the cap M");
  }
  if (hp_.step.kind == StepPolicyKind::kFixed) return hp_.step.eta;
  if (t >= hp_.freeze_iter) return frozen_eta_;
  return theorem_step_size(hp_.lipschitz, hp_.rho1, hp_.rho2, workers_, planes,
                           hp_.gamma, c1(t), c2(t));
}

double Schedules::eta_h(std::size_t t, std::size_t planes) const {
  const double shared = eta(t, planes);
  if (hp_.step.kind == StepPolicyKind::kFixed && hp_.step.eta_h) return *hp_.step.eta_h;
  return shared;
}

ProblemState ProblemState::zeros(std::size_t workers, std::size_t dim) {
  ProblemState s;
  s.w.assign(workers, Vec(dim, 0.0));
  s.z.assign(dim, 0.0);
  s.phi.assign(workers, Vec(dim, 0.0));
  return s;
}

Vec project_box(std::span<const double> v, double radius) {
  Vec out(v.begin(), v.end());
  project_box_inplace(out, radius);
  return out;
}

void project_box_inplace(std::span<double> v, double radius) {
  for (double& x : v) x = std::clamp(x, -radius, radius);
}

double project_interval(double x, double radius) {
  return std::clamp(x, 0.0, radius);
}

std::vector<std::string> check_state(const ProblemState& state,
                                     std::span<const double> duals,
                                     const Radii& radii) {
  std::vector<std::string> issues;
  auto inf_norm = [](const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  for (std::size_t j = 0; j < state.w.size(); ++j) {
    if (inf_norm(state.w[j]) > radii.w) {
      issues.push_back("w[" + std::to_string(j) + "] outside box");
    }
  }
  if (inf_norm(state.z) > radii.w) issues.emplace_back("z outside box");
  if (state.h < 0.0 || state.h > radii.h) issues.emplace_back("h outside box");
  for (std::size_t l = 0; l < duals.size(); ++l) {
    if (duals[l] < 0.0 || duals[l] > radii.lambda) {
      issues.push_back("lambda[" + std::to_string(l) + "] outside box");
    }
  }
  for (std::size_t j = 0; j < state.phi.size(); ++j) {
    if (inf_norm(state.phi[j]) > radii.phi) {
      issues.push_back("phi[" + std::to_string(j) + "] outside box");
    }
  }
  return issues;
}

}  // namespace aspire
