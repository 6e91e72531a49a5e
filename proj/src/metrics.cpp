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

#include "aspire/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace aspire {

namespace {

using nlohmann::json;

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vec primal_residual(const Vec& x, const Vec& grad, double step, double radius) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double moved = std::clamp(x[i] - step * grad[i], -radius, radius);
    out[i] = (x[i] - moved) / step;
  }
  return out;
}

json record_to_json(const RunRecord& r) {
  json j;
  j["t"] = r.t;
  j["time"] = r.time;
  j["gap"] = r.gap;
  j["planes"] = r.planes;
  j["S"] = r.quorum;
  j["f"] = r.f;
  j["loss_worst"] = r.loss_worst;
  j["active"] = r.active;
  j["staleness"] = r.staleness;
  j["duals"] = r.duals;
  j["spread"] = r.spread ? json(*r.spread) : json(nullptr);
  if (r.attack_rate) j["attack_rate"] = *r.attack_rate;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.t = j.at("t").get<std::size_t>();
  r.time = j.at("time").get<double>();
  r.gap = j.at("gap").get<double>();
  r.planes = j.at("planes").get<std::size_t>();
  r.quorum = j.at("S").get<std::size_t>();
  r.f = j.at("f").get<Vec>();
  r.loss_worst = j.at("loss_worst").get<double>();
  r.active = j.at("active").get<std::vector<std::size_t>>();
  r.staleness = j.at("staleness").get<std::size_t>();
  r.duals = j.at("duals").get<Vec>();
  if (!j.at("spread").is_null()) r.spread = j.at("spread").get<double>();
  if (j.contains("attack_rate")) r.attack_rate = j.at("attack_rate").get<double>();
  return r;
}

}  // namespace

double GapReport::block_sum_squares() const {
  double s = z_block * z_block + h_block * h_block;
  for (double b : w_blocks) s += b * b;
  for (double b : lambda_blocks) s += b * b;
  for (double b : phi_blocks) s += b * b;
  return s;
}

GapReport stationarity_gap(const LagrangianContext& ctx, const GapSteps& steps,
                           std::size_t t) {
  check_context(ctx);
  const auto& s = ctx.state;
  const auto& radii = ctx.hp.radii;
  GapReport rep;
  rep.t = t;
  for (std::size_t j = 0; j < s.workers(); ++j) {
    rep.w_blocks.push_back(
        norm2(primal_residual(s.w[j], grad_w(ctx, j), steps.alpha_w, radii.w)));
  }
  rep.z_block = norm2(primal_residual(s.z, grad_z(ctx), steps.eta_z, radii.w));
  {
    const double moved =
        project_interval(s.h - steps.eta_h * grad_h(ctx), radii.h);
    rep.h_block = std::abs(s.h - moved) / steps.eta_h;
  }
  if (steps.include_lambda) {
    for (std::size_t l = 0; l < ctx.planes.size(); ++l) {
      const double lam = ctx.planes[l].dual;
      const double moved =
          project_interval(lam + steps.rho1 * grad_lambda(ctx, l, 0.0), radii.lambda);
      rep.lambda_blocks.push_back(std::abs(lam - moved) / steps.rho1);
    }
  }
  for (std::size_t j = 0; j < s.workers(); ++j) {
    const Vec grad = grad_phi(ctx, j, 0.0);
    Vec r(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double x = s.phi[j][i];
      const double moved =
          std::clamp(x + steps.rho2 * grad[i], -radii.phi, radii.phi);
      r[i] = (x - moved) / steps.rho2;
    }
    rep.phi_blocks.push_back(norm2(r));
  }
  rep.total = std::sqrt(rep.block_sum_squares());
  return rep;
}

bool is_eps_stationary(const GapReport& report, double eps) {
  return report.total <= eps;
}

WorstCaseMetrics worst_case_metrics(std::span<const double> losses,
                                    std::span<const double> accuracies) {
  if (losses.empty()) throw InvalidArgument("no per-worker losses given");
  WorstCaseMetrics m;
  m.loss_worst = *std::max_element(losses.begin(), losses.end());
  double sum = 0.0;
  for (double x : losses) sum += x;
  m.loss_mean = sum / static_cast<double>(losses.size());
  if (accuracies.empty()) {
    m.acc_worst = m.acc_std = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  m.acc_worst = *std::min_element(accuracies.begin(), accuracies.end());
  // Shifted by the first value, so equal accuracies give exactly 0.
  const double n = static_cast<double>(accuracies.size());
  double sd = 0.0, sd2 = 0.0;
  for (double a : accuracies) {
    sd += a - accuracies[0];
    sd2 += (a - accuracies[0]) * (a - accuracies[0]);
  }
  m.acc_std = std::sqrt(std::max(0.0, (sd2 - sd * sd / n) / n));
  return m;
}

double success_attack_rate(const LocalObjective& backdoor,
                           std::span<const double> w, int target) {
  if (backdoor.kind() != ObjectiveKind::kSoftmax || backdoor.samples() == 0) {
    throw InvalidArgument("attack rate is undefined without poisoned samples");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < backdoor.samples(); ++i) {
    if (backdoor.predict(w, i) == target) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(backdoor.samples());
}

void RunLog::append(RunRecord record) {
  if (!records_.empty() && record.t <= records_.back().t) {
    throw InvalidArgument("run log iterations must be strictly increasing");
  }
  records_.push_back(std::move(record));
}

std::optional<std::size_t> RunLog::first_eps_index(double eps) const {
  for (const auto& r : records_) {
    if (r.gap <= eps) return r.t;
  }
  return std::nullopt;
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void RunLog::write_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << to_jsonl();
  if (!out) throw IoError("failed writing " + path);
}

RunLog RunLog::read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  RunLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      log.append(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError("malformed run log line in " + path + ": " + e.what());
    }
  }
  return log;
}

void RunLog::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << "t,time_s,gap,planes,S,loss_worst\n";
  out.precision(17);
  for (const auto& r : records_) {
    out << r.t << ',' << r.time << ',' << r.gap << ',' << r.planes << ','
        << r.quorum << ',' << r.loss_worst << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace aspire
