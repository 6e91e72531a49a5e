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

#include "aspire/experiments.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace aspire {

namespace {

using nlohmann::json;

std::string out_path(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
  return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

// 12 significant digits; non-finite values spelled out.
std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  return fmt::format("{:.12g}", v);
}

}  // namespace

ExperimentRun run_experiment(const ExperimentConfig& config,
                             const Problem& problem) {
  AttackProbe probe;
  const AttackProbe* probe_ptr = nullptr;
  if (problem.backdoor) {
    probe.backdoor = &*problem.backdoor;
    probe.target = problem.target_label;
    probe_ptr = &probe;
  }
  ExperimentRun out;
  out.result = run(config.engine, problem.data.train, probe_ptr);
  const auto& r = out.result;
  auto& s = out.summary;
  s.final_gap = r.final_gap;
  s.converged = r.converged;
  s.t_eps = r.t_eps;
  s.time_eps = r.time_eps;
  s.iterations = r.iterations;
  s.sim_time = r.sim_time;
  s.planes_final = r.planes.size();
  s.planes_distinct = r.planes_distinct;
  s.plane_solves = r.plane_solves;
  s.max_staleness = r.max_staleness;
  s.invariant_violations = r.invariant_violations;
  s.quorum_switches = r.switches.size();
  s.attack_rate = r.attack_rate;
  const Vec& z = r.state.z;
  for (std::size_t j = 0; j < problem.data.train.size(); ++j) {
    s.losses.push_back(problem.data.train[j].loss(z));
    const auto& test = problem.data.test[j];
    if (test.kind() == ObjectiveKind::kSoftmax) s.accuracies.push_back(test.accuracy(z));
  }
  s.metrics = worst_case_metrics(s.losses, s.accuracies);
  return out;
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["final_gap"] = s.final_gap;
  j["converged"] = s.converged;
  j["t_eps"] = s.t_eps ? json(*s.t_eps) : json(nullptr);
  j["time_eps"] = optional_json(s.time_eps);
  j["iterations"] = s.iterations;
  j["sim_time"] = s.sim_time;
  j["planes_final"] = s.planes_final;
  j["planes_distinct"] = s.planes_distinct;
  j["plane_solves"] = s.plane_solves;
  j["max_staleness"] = s.max_staleness;
  j["invariant_violations"] = s.invariant_violations;
  j["quorum_switches"] = s.quorum_switches;
  j["loss_worst"] = s.metrics.loss_worst;
  j["loss_mean"] = s.metrics.loss_mean;
  j["acc_worst"] = optional_json(std::isnan(s.metrics.acc_worst)
                                     ? std::nullopt
                                     : std::optional(s.metrics.acc_worst));
  j["acc_std"] = optional_json(std::isnan(s.metrics.acc_std)
                                   ? std::nullopt
                                   : std::optional(s.metrics.acc_std));
  j["losses"] = s.losses;
  j["accuracies"] = s.accuracies;
  j["attack_rate"] = optional_json(s.attack_rate);
  return j.dump(2) + "\n";
}

RunSummary cmd_run(ExperimentConfig config) {
  Problem problem = build_problem(config);
  ExperimentRun er = run_experiment(config, problem);
  const auto& dir = config.output_dir;
  er.result.log.write_jsonl(out_path(dir, "runlog.jsonl"));
  er.result.log.write_csv(out_path(dir, "runlog.csv"));
  write_text(out_path(dir, "summary.json"), summary_to_json(er.summary));
  spdlog::info("run finished: {} iterations, gap {:.3e}, converged={}",
               er.summary.iterations, er.summary.final_gap, er.summary.converged);
  return er.summary;
}

std::vector<SweepRow> sweep_gamma(ExperimentConfig config, Vec gammas) {
  Vec unique;
  for (double g : gammas) {
    if (std::find(unique.begin(), unique.end(), g) != unique.end()) {
      spdlog::warn("duplicate gamma {} ignored", g);
      continue;
    }
    unique.push_back(g);
  }
  if (unique.empty()) throw InvalidArgument("sweep needs at least one gamma");
  Problem problem = build_problem(config);
  if (config.engine.ambiguity.kind != AmbiguityKind::kCDNorm) {
    throw ConfigError("gamma sweeps need a cdnorm ambiguity set");
  }
  std::vector<SweepRow> rows;
  for (double g : unique) {
    ExperimentConfig c = config;
    c.engine.ambiguity.budget = g;
    const auto er = run_experiment(c, problem);
    rows.push_back({g, er.summary.metrics.loss_worst, er.summary.metrics.loss_mean});
    spdlog::info("gamma {}: loss_worst {:.6f}", g, rows.back().loss_worst);
  }
  std::string csv = "gamma,loss_worst,loss_mean\n";
  for (const auto& r : rows) {
    csv += num(r.gamma) + "," + num(r.loss_worst) + "," + num(r.loss_mean) + "\n";
  }
  write_text(out_path(config.output_dir, "sweep.csv"), csv);
  return rows;
}

std::vector<CompareRow> compare_modes(ExperimentConfig config) {
  Problem problem = build_problem(config);
  const std::size_t n = problem.data.train.size();
  const QuorumPolicy base = config.engine.quorum;
  std::vector<std::pair<std::string, QuorumPolicy>> quorums;
  quorums.push_back({"S=1", {QuorumMode::kFixed, 1, base.beta1, base.smoothing}});
  quorums.push_back({"S=N", {QuorumMode::kFixed, n, base.beta1, base.smoothing}});
  if (n >= 2) {
    const std::size_t s = base.mode == QuorumMode::kAdaptive ? base.s : 1;
    quorums.push_back({"adaptive", {QuorumMode::kAdaptive, s, base.beta1, base.smoothing}});
  }
  std::vector<CompareRow> rows;
  for (RunMode mode : {RunMode::kEase, RunMode::kCuttingPlane}) {
    for (const auto& [label, policy] : quorums) {
      ExperimentConfig c = config;
      c.engine.mode = mode;
      c.engine.quorum = policy;
      const auto er = run_experiment(c, problem);
      CompareRow row;
      row.mode = to_string(mode);
      row.quorum = label;
      row.planes_used = er.summary.planes_distinct;
      row.time_to_eps = er.summary.time_eps;
      row.t_eps = er.summary.t_eps;
      row.plane_solves = er.summary.plane_solves;
      row.final_gap = er.summary.final_gap;
      rows.push_back(row);
    }
  }
  std::string csv = "mode,quorum,planes_used,time_to_eps,t_eps,plane_solves,final_gap\n";
  for (const auto& r : rows) {
    csv += r.mode + "," + r.quorum + "," + std::to_string(r.planes_used) + "," +
           (r.time_to_eps ? num(*r.time_to_eps) : "") + "," +
           (r.t_eps ? std::to_string(*r.t_eps) : "") + "," +
           std::to_string(r.plane_solves) + "," + num(r.final_gap) + "\n";
  }
  write_text(out_path(config.output_dir, "compare.csv"), csv);
  return rows;
}

std::vector<BaselineRow> baseline(ExperimentConfig config) {
  Problem problem = build_problem(config);
  std::vector<BaselineRow> rows;
  {
    ExperimentConfig c = config;
    if (c.engine.mode == RunMode::kFixedWeights) c.engine.mode = RunMode::kEase;
    const auto er = run_experiment(c, problem);
    rows.push_back({"aspire_ease", er.summary.metrics, er.summary.attack_rate,
                    er.summary.final_gap});
  }
  {
    ExperimentConfig c = config;
    c.engine.mode = RunMode::kFixedWeights;
    const auto er = run_experiment(c, problem);
    rows.push_back({"mix_even", er.summary.metrics, er.summary.attack_rate,
                    er.summary.final_gap});
  }
  std::string csv = "mode,loss_worst,loss_mean,acc_worst,acc_std,attack_rate,final_gap\n";
  for (const auto& r : rows) {
    csv += r.mode + "," + num(r.metrics.loss_worst) + "," + num(r.metrics.loss_mean) +
           "," + num(r.metrics.acc_worst) + "," + num(r.metrics.acc_std) + "," +
           (r.attack_rate ? num(*r.attack_rate) : "") + "," + num(r.final_gap) + "\n";
  }
  write_text(out_path(config.output_dir, "baseline.csv"), csv);
  return rows;
}

std::vector<BenchRow> bench_uncertainty(const std::vector<AmbiguityKind>& kinds,
                                        const std::vector<std::size_t>& sizes,
                                        std::size_t repetitions,
                                        std::uint64_t seed,
                                        const std::string& out_dir) {
  auto rows = uncertainty_bench(kinds, sizes, repetitions, seed);
  write_bench_csv(rows, out_path(out_dir, "bench.csv"));
  return rows;
}

}  // namespace aspire
