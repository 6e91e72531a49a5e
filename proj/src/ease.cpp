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

#include "aspire/ease.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aspire {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool same_plane(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  }
  return true;
}

}  // namespace

CuttingPlaneSet::CuttingPlaneSet(std::size_t cap) : cap_(cap) {
  if (cap_ == 0) throw InvalidArgument("plane cap M must be >= 1");
}

Vec CuttingPlaneSet::duals() const {
  Vec d;
  d.reserve(planes_.size());
  for (const auto& p : planes_) d.push_back(p.dual);
  return d;
}

void CuttingPlaneSet::set_dual(std::size_t l, double value) {
  planes_.at(l).dual = value;
}

void CuttingPlaneSet::set_duals(std::span<const double> values) {
  if (values.size() != planes_.size()) {
    throw DimensionMismatch("dual vector length must equal the plane count");
  }
  for (std::size_t l = 0; l < values.size(); ++l) planes_[l].dual = values[l];
}

bool CuttingPlaneSet::add(Vec a, std::size_t t) {
  if (!planes_.empty() && a.size() != planes_.front().a.size()) {
    throw DimensionMismatch("plane length must equal the worker count");
  }
  bool evicted = false;
  if (planes_.size() >= cap_) {
    auto victim = std::max_element(
        planes_.begin(), planes_.end(),
        [](const CuttingPlane& x, const CuttingPlane& y) {
          if (x.zero_streak != y.zero_streak) return x.zero_streak < y.zero_streak;
          if (x.created_at != y.created_at) return x.created_at > y.created_at;
          return x.id > y.id;
        });
    planes_.erase(victim);
    evicted = true;
  }
  if (std::none_of(history_.begin(), history_.end(),
                   [&](const Vec& h) { return same_plane(h, a); })) {
    history_.push_back(a);
  }
  CuttingPlane p;
  p.a = std::move(a);
  p.created_at = t;
  p.id = next_id_++;
  planes_.push_back(std::move(p));
  ++total_added_;
  return evicted;
}

void CuttingPlaneSet::record_duals() {
  for (auto& p : planes_) {
    p.zero_streak = p.dual <= kZeroDual ? p.zero_streak + 1 : 0;
  }
}

std::size_t CuttingPlaneSet::prune(std::span<const double> f) {
  const auto before = planes_.size();
  const bool all_inactive =
      std::all_of(planes_.begin(), planes_.end(),
                  [](const CuttingPlane& p) { return p.zero_streak >= 2; });
  std::uint64_t keep = std::numeric_limits<std::uint64_t>::max();
  if (all_inactive && !planes_.empty()) {
    auto best = planes_.begin();
    for (auto it = planes_.begin(); it != planes_.end(); ++it) {
      if (f.empty()) {
        if (it->id > best->id) best = it;
      } else if (dot(it->a, f) > dot(best->a, f)) {
        best = it;
      }
    }
    keep = best->id;
  }
  std::erase_if(planes_, [&](const CuttingPlane& p) {
    return p.zero_streak >= 2 && p.id != keep;
  });
  return before - planes_.size();
}

double CuttingPlaneSet::max_value(std::span<const double> f) const {
  if (planes_.empty()) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : planes_) best = std::max(best, dot(p.a, f));
  return best;
}

double CuttingPlaneSet::weight(std::size_t j, double p_bar) const {
  double s = 0.0;
  for (const auto& p : planes_) s += p.dual * (p_bar + p.a[j]);
  return s;
}

Vec generate_plane(const AmbiguitySpec& spec, std::span<const double> f,
                   double p_bar) {
  WorstCase wc = solve_worst_case(spec, f, p_bar);
  for (double& x : wc.p) x -= p_bar;
  return std::move(wc.p);
}

bool violated(std::span<const double> candidate, const CuttingPlaneSet& set,
              std::span<const double> f, double tol) {
  if (candidate.size() != f.size()) {
    throw DimensionMismatch("candidate plane length must equal loss length");
  }
  return dot(candidate, f) > set.max_value(f) + tol;
}

PlaneUpdate maybe_update_planes(CuttingPlaneSet& set, const AmbiguitySpec& spec,
                                std::span<const double> f, std::size_t t,
                                const HyperParams& hp, PlaneMode mode) {
  PlaneUpdate out;
  if ((t + 1) % hp.plane_period != 0 || t >= hp.freeze_iter) return out;
  out.gated = true;
  const double p_bar = nominal_weight(hp, f.size());
  Vec candidate = generate_plane(spec, f, p_bar);
  if (violated(candidate, set, f)) {
    out.evicted = set.add(std::move(candidate), t);
    out.added = true;
  }
  if (mode == PlaneMode::kEase) out.pruned = set.prune(f);
  return out;
}

}  // namespace aspire
