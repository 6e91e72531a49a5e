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

// Cutting-plane active set. Each plane a_l encodes the constraint
// sum_j (p_bar + a_lj) f_j <= h and carries its own dual lambda_l.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aspire/core.hpp"
#include "aspire/uncertainty.hpp"

namespace aspire {

inline constexpr double kViolationTol = 1e-9;
inline constexpr double kZeroDual = 1e-12;

struct CuttingPlane {
  Vec a;
  double dual = 0.0;
  std::size_t zero_streak = 0;  // consecutive dual checks with lambda == 0
  std::size_t created_at = 0;
  std::uint64_t id = 0;
};

enum class PlaneMode {
  kEase,          // generate, add, and prune inactive planes
  kCuttingPlane,  // generate and add only
};

class CuttingPlaneSet {
 public:
  explicit CuttingPlaneSet(std::size_t cap = 16);

  std::size_t size() const { return planes_.size(); }
  bool empty() const { return planes_.empty(); }
  std::size_t cap() const { return cap_; }
  const std::vector<CuttingPlane>& planes() const { return planes_; }
  const CuttingPlane& operator[](std::size_t l) const { return planes_[l]; }

  Vec duals() const;
  void set_dual(std::size_t l, double value);
  void set_duals(std::span<const double> values);

  // Appends `a` with a zero dual. At the cap, the plane with the largest
  // zero streak (oldest on ties) is evicted first. Returns true when a plane
  // had to be evicted.
  bool add(Vec a, std::size_t t);

  // Call once after every dual update: bumps or resets the zero streaks.
  void record_duals();

  // Removes every plane whose dual was zero at the last two checks.
  // Survivors keep their order. When every plane qualifies, the one with the
  // largest a_l' f is kept so the relaxation never loses all constraints
  // (with empty `f` the newest plane is kept). Returns the number removed.
  std::size_t prune(std::span<const double> f = {});

  // max_l a_l' f, or 0 for an empty set.
  double max_value(std::span<const double> f) const;

  // sum_l lambda_l (p_bar + a_lj) for worker j.
  double weight(std::size_t j, double p_bar) const;

  std::size_t total_added() const { return total_added_; }
  std::size_t distinct_added() const { return history_.size(); }

 private:
  std::size_t cap_;
  std::vector<CuttingPlane> planes_;
  std::uint64_t next_id_ = 0;
  std::size_t total_added_ = 0;
  std::vector<Vec> history_;  // every distinct plane ever inserted
};

// Candidate plane p* - p_bar * 1 from the set's worst-case distribution.
Vec generate_plane(const AmbiguitySpec& spec, std::span<const double> f,
                   double p_bar);

// candidate' f exceeds max_l a_l' f by more than `tol` (0 for an empty set).
bool violated(std::span<const double> candidate, const CuttingPlaneSet& set,
              std::span<const double> f, double tol = kViolationTol);

struct PlaneUpdate {
  bool gated = false;     // the (t+1) mod k == 0 and t < T1 gate was open
  bool added = false;
  bool evicted = false;
  std::size_t pruned = 0;
};

PlaneUpdate maybe_update_planes(CuttingPlaneSet& set, const AmbiguitySpec& spec,
                                std::span<const double> f, std::size_t t,
                                const HyperParams& hp, PlaneMode mode);

}  // namespace aspire
