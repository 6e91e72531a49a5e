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

#include "aspire/config.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aspire {

namespace {

using nlohmann::json;

// Thin cursor over a JSON object that remembers its path for messages and
// rejects keys nobody asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) fail("missing required key '" + key + "'");
    return as<T>(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), path_ + "." + key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(path_ + ": " + what);
  }

 private:
  template <typename T>
  T as(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail("key '" + key + "' has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::MatrixXd to_matrix(const json& j, const std::string& where) {
  try {
    const auto rows = j.get<std::vector<Vec>>();
    if (rows.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) {
        throw ConfigError(where + ": ragged matrix");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return m;
  } catch (const json::exception&) {
    throw ConfigError(where + ": expected a list of numeric rows");
  }
}

void parse_hyper(Section s, HyperParams& hp, bool& lipschitz_auto) {
  hp.rho1 = s.get("rho1", hp.rho1);
  hp.rho2 = s.get("rho2", hp.rho2);
  hp.kappa1 = s.get("kappa1", hp.kappa1);
  if (s.has("lipschitz")) {
    const json& l = s.raw("lipschitz");
    if (l.is_string()) {
      if (l.get<std::string>() != "auto") s.fail("lipschitz must be a number or \"auto\"");
      lipschitz_auto = true;
    } else {
      hp.lipschitz = s.get("lipschitz", hp.lipschitz);
    }
  }
  hp.gamma = s.get("gamma", hp.gamma);
  hp.max_planes = s.get("max_planes", hp.max_planes);
  hp.freeze_iter = s.get("freeze_iter", hp.freeze_iter);
  hp.staleness = s.get("staleness", hp.staleness);
  hp.plane_period = s.get("plane_period", hp.plane_period);
  if (s.has("p_bar")) hp.nominal_weight = s.get("p_bar", 0.0);
  if (s.has("c1_floor")) hp.c1_floor = s.get("c1_floor", 0.0);
  if (s.has("c2_floor")) hp.c2_floor = s.get("c2_floor", 0.0);
  if (s.has("radii")) {
    Section r = s.child("radii");
    hp.radii.w = r.get("w", hp.radii.w);
    hp.radii.h = r.get("h", hp.radii.h);
    hp.radii.lambda = r.get("lambda", hp.radii.lambda);
    hp.radii.phi = r.get("phi", hp.radii.phi);
    r.finish();
  }
  if (s.has("step_policy")) {
    Section p = s.child("step_policy");
    const auto kind = p.get<std::string>("kind", "theorem");
    if (kind == "theorem") {
      hp.step.kind = StepPolicyKind::kTheorem;
    } else if (kind == "fixed") {
      hp.step.kind = StepPolicyKind::kFixed;
      hp.step.eta = p.require<double>("eta");
      if (p.has("eta_h")) hp.step.eta_h = p.require<double>("eta_h");
      hp.step.c1 = p.get("c1", 0.0);
      hp.step.c2 = p.get("c2", 0.0);
    } else {
      p.fail("kind must be \"theorem\" or \"fixed\"");
    }
    p.finish();
  }
  s.finish();
}

void parse_objective(Section s, ObjectiveConfig& obj,
                     const std::string& base_dir) {
  obj.kind = s.require<std::string>("kind");
  if (s.has("data_seed")) obj.data_seed = s.get<std::uint64_t>("data_seed", 0);
  if (obj.kind == "quadratic") {
    obj.centers = s.require<std::vector<Vec>>("centers");
    if (s.has("curvature")) {
      const json& c = s.raw("curvature");
      obj.curvatures = c.is_array() ? c.get<Vec>() : Vec{c.get<double>()};
    } else {
      obj.curvatures = {1.0};
    }
  } else if (obj.kind == "synthetic") {
    auto& sp = obj.synthetic;
    obj.workers = s.require<std::size_t>("workers");
    const auto model = s.get<std::string>("model", "softmax");
    if (model == "softmax") {
      sp.kind = ObjectiveKind::kSoftmax;
    } else if (model == "quadratic") {
      sp.kind = ObjectiveKind::kQuadratic;
    } else {
      s.fail("model must be \"softmax\" or \"quadratic\"");
    }
    sp.split = s.get("split", sp.split);
    sp.skew = s.get("skew", sp.skew);
    sp.dim = s.get("dim", sp.dim);
    sp.classes = s.get("classes", sp.classes);
    sp.samples = s.get("samples", sp.samples);
    sp.test_samples = s.get("test_samples", sp.test_samples);
    sp.curvature = s.get("curvature", sp.curvature);
    sp.spread = s.get("spread", sp.spread);
    sp.mu = s.get("mu", sp.mu);
    sp.separation = s.get("separation", sp.separation);
    sp.noise = s.get("noise", sp.noise);
    sp.shift = s.get("shift", sp.shift);
  } else if (obj.kind == "csv") {
    auto& c = obj.csv;
    const auto path = s.require<std::string>("path");
    c.path = std::filesystem::path(path).is_absolute()
                 ? path
                 : (std::filesystem::path(base_dir) / path).string();
    c.schema.feature_cols = s.require<std::vector<std::string>>("feature_cols");
    c.schema.label_col = s.require<std::string>("label_col");
    c.schema.worker_col = s.require<std::string>("worker_col");
    if (s.has("num_workers")) c.schema.num_workers = s.get<std::size_t>("num_workers", 0);
    c.mu = s.get("mu", c.mu);
    c.classes = s.get("classes", c.classes);
    c.test_fraction = s.get("test_fraction", c.test_fraction);
    if (c.test_fraction < 0.0 || c.test_fraction >= 1.0) {
      s.fail("test_fraction must lie in [0, 1)");
    }
  } else {
    s.fail("kind must be \"quadratic\", \"synthetic\" or \"csv\"");
  }
  s.finish();
}

Vec parse_weights(const json& j, std::size_t n, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() != "uniform") {
      throw ConfigError(where + ": expected \"uniform\" or a list");
    }
    return Vec(n, 1.0 / static_cast<double>(n));
  }
  try {
    Vec v = j.get<Vec>();
    if (v.size() != n) {
      throw ConfigError(where + ": expected " + std::to_string(n) + " entries");
    }
    return v;
  } catch (const json::exception&) {
    throw ConfigError(where + ": expected \"uniform\" or a numeric list");
  }
}

Vec parse_per_worker(const json& j, std::size_t n, const std::string& where) {
  if (j.is_number()) return Vec(n, j.get<double>());
  return parse_weights(j, n, where);
}

AmbiguitySpec parse_ambiguity(const json& j, std::size_t n) {
  Section s(j, "ambiguity");
  AmbiguitySpec spec;
  try {
    spec.kind = parse_ambiguity_kind(s.require<std::string>("kind"));
  } catch (const InvalidArgument& e) {
    s.fail(e.what());
  }
  auto prior = [&] {
    return s.has("q") ? parse_weights(s.raw("q"), n, s.path("q"))
                      : Vec(n, 1.0 / static_cast<double>(n));
  };
  switch (spec.kind) {
    case AmbiguityKind::kCDNorm:
      spec.q = prior();
      spec.p_tilde = parse_per_worker(s.raw("p_tilde"), n, s.path("p_tilde"));
      spec.budget = s.require<double>("budget");
      break;
    case AmbiguityKind::kBox:
      spec.lower = parse_per_worker(s.raw("lower"), n, s.path("lower"));
      spec.upper = parse_per_worker(s.raw("upper"), n, s.path("upper"));
      break;
    case AmbiguityKind::kEllipsoid: {
      spec.q = prior();
      const auto nn = static_cast<Eigen::Index>(n);
      if (!s.has("shape") || (s.raw("shape").is_string() &&
                              s.raw("shape").get<std::string>() == "identity")) {
        spec.shape = Eigen::MatrixXd::Identity(nn, nn);
      } else {
        spec.shape = to_matrix(s.raw("shape"), s.path("shape"));
      }
      spec.radius = s.require<double>("radius");
      break;
    }
    case AmbiguityKind::kPolyhedron: {
      spec.d_rows = to_matrix(s.raw("d_rows"), s.path("d_rows"));
      const Vec rhs = s.require<Vec>("d_rhs");
      spec.d_rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(),
                                                     static_cast<Eigen::Index>(rhs.size()));
      if (spec.d_rows.size() == 0) spec.d_rows.resize(0, static_cast<Eigen::Index>(n));
      break;
    }
    case AmbiguityKind::kKL:
      spec.q = prior();
      spec.radius = s.require<double>("radius");
      break;
    case AmbiguityKind::kWasserstein1:
      spec.q = prior();
      spec.radius = s.require<double>("radius");
      if (s.has("ground_cost")) {
        spec.ground_cost = to_matrix(s.raw("ground_cost"), s.path("ground_cost"));
      }
      break;
  }
  s.finish();
  try {
    validate(spec);
  } catch (const Error& e) {
    throw ConfigError(std::string("ambiguity: ") + e.what());
  }
  if (spec.workers() != n) {
    throw ConfigError("ambiguity: set size does not match the worker count");
  }
  return spec;
}

// Splits the trailing share of every worker's rows into a test set.
WorkerData hold_out(const std::vector<LocalObjective>& objs, double fraction) {
  WorkerData out;
  for (const auto& o : objs) {
    const auto n = static_cast<Eigen::Index>(o.samples());
    const auto n_test = static_cast<Eigen::Index>(
        std::floor(fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test >= n) {
      out.train.push_back(o);
      out.test.push_back(o);
      continue;
    }
    const Eigen::MatrixXd x = o.features();
    const auto& y = o.labels();
    const auto n_train = n - n_test;
    out.train.push_back(LocalObjective::softmax(
        x.topRows(n_train), std::vector<int>(y.begin(), y.begin() + n_train),
        o.classes(), o.mu()));
    out.test.push_back(LocalObjective::softmax(
        x.bottomRows(n_test), std::vector<int>(y.begin() + n_train, y.end()),
        o.classes(), o.mu()));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text,
                              const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section s(root, "config");
  ExperimentConfig cfg;
  auto& eng = cfg.engine;
  eng.seed = s.get<std::uint64_t>("seed", 0);
  eng.max_iters = s.get("max_iters", eng.max_iters);
  eng.eps = s.get("eps", eng.eps);
  cfg.output_dir = s.get<std::string>("output_dir", cfg.output_dir);
  eng.check_invariants = s.get("check_invariants", eng.check_invariants);
  parse_objective(s.child("objective"), cfg.objective, base_dir);
  if (s.has("malicious")) {
    Section m = s.child("malicious");
    MaliciousSpec ms;
    ms.worker = m.require<std::size_t>("worker");
    ms.fraction = m.get("fraction", ms.fraction);
    ms.inflation = m.get("inflation", ms.inflation);
    ms.target_label = m.get("target_label", ms.target_label);
    ms.trigger_value = m.get("trigger_value", ms.trigger_value);
    m.finish();
    cfg.malicious = ms;
  }
  if (!s.has("ambiguity")) s.fail("missing required key 'ambiguity'");
  cfg.ambiguity_json = s.raw("ambiguity").dump();
  if (s.has("hyper")) parse_hyper(s.child("hyper"), eng.hp, cfg.lipschitz_auto);
  if (s.has("quorum")) {
    Section q = s.child("quorum");
    const auto mode = q.get<std::string>("mode", "fixed");
    if (mode == "fixed") {
      eng.quorum.mode = QuorumMode::kFixed;
    } else if (mode == "adaptive") {
      eng.quorum.mode = QuorumMode::kAdaptive;
    } else {
      q.fail("mode must be \"fixed\" or \"adaptive\"");
    }
    eng.quorum.s = q.get("s", eng.quorum.s);
    eng.quorum.beta1 = q.get("beta1", eng.quorum.beta1);
    eng.quorum.smoothing = q.get("smoothing", eng.quorum.smoothing);
    q.finish();
  }
  if (s.has("delay")) {
    Section d = s.child("delay");
    eng.delay.base = d.get("base", Vec{});
    eng.delay.jitter = d.get("jitter", 0.0);
    if (d.has("stragglers")) {
      const json& list = d.raw("stragglers");
      if (!list.is_array()) d.fail("stragglers must be a list");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Section w(list[i], d.path("stragglers") + "[" + std::to_string(i) + "]");
        StragglerWindow win;
        win.worker = w.require<std::size_t>("worker");
        win.t_start = w.require<double>("t_start");
        win.t_end = w.require<double>("t_end");
        win.multiplier = w.require<double>("multiplier");
        w.finish();
        eng.delay.stragglers.push_back(win);
      }
    }
    d.finish();
  }
  try {
    eng.mode = parse_run_mode(s.get<std::string>("mode", "ease"));
  } catch (const InvalidArgument& e) {
    s.fail(e.what());
  }
  if (s.has("fixed_weights")) {
    if (s.raw("fixed_weights").is_string()) {
      cfg.fixed_weights = s.get<std::string>("fixed_weights", "prior");
      if (cfg.fixed_weights != "prior" && cfg.fixed_weights != "uniform") {
        s.fail("fixed_weights must be \"prior\", \"uniform\" or a list");
      }
    } else {
      cfg.fixed_weights = "list";
      eng.fixed_weights = s.get("fixed_weights", Vec{});
    }
  }
  if (s.has("execution")) {
    Section e = s.child("execution");
    const auto kind = e.get<std::string>("kind", "simulated");
    if (kind == "simulated") {
      eng.execution = Execution::kSimulated;
    } else if (kind == "threaded") {
      eng.execution = Execution::kThreaded;
    } else {
      e.fail("kind must be \"simulated\" or \"threaded\"");
    }
    eng.time_scale = e.get("time_scale", eng.time_scale);
    e.finish();
  }
  s.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(buf.str(), dir.empty() ? "." : dir.string());
}

Problem build_problem(ExperimentConfig& config) {
  auto& eng = config.engine;
  const auto& obj = config.objective;
  const std::uint64_t data_seed = obj.data_seed.value_or(eng.seed);
  Problem problem;
  if (obj.kind == "quadratic") {
    if (obj.centers.empty()) throw ConfigError("objective: no centers given");
    if (obj.curvatures.size() != 1 && obj.curvatures.size() != obj.centers.size()) {
      throw ConfigError("objective: curvature needs 1 or N values");
    }
    for (std::size_t j = 0; j < obj.centers.size(); ++j) {
      const double c = obj.curvatures.size() == 1 ? obj.curvatures[0] : obj.curvatures[j];
      problem.data.train.push_back(LocalObjective::quadratic(obj.centers[j], c));
    }
    problem.data.test = problem.data.train;
  } else if (obj.kind == "synthetic") {
    problem.data = make_scenario(obj.synthetic, obj.workers, data_seed);
  } else {
    auto res = ingest_csv(obj.csv.path, obj.csv.schema, obj.csv.mu, obj.csv.classes);
    problem.data = hold_out(res.objectives, obj.csv.test_fraction);
  }
  if (config.malicious) {
    auto outcome = apply_malicious(problem.data, *config.malicious, data_seed + 1);
    problem.data = std::move(outcome.data);
    problem.backdoor = std::move(outcome.backdoor);
    problem.target_label = config.malicious->target_label;
  }
  const std::size_t n = problem.data.train.size();
  if (eng.mode != RunMode::kFixedWeights || !config.ambiguity_json.empty()) {
    eng.ambiguity = parse_ambiguity(json::parse(config.ambiguity_json), n);
  }
  if (config.fixed_weights == "prior") {
    eng.fixed_weights = eng.ambiguity.q;  // empty (uniform) for sets without a prior
  } else if (config.fixed_weights == "uniform") {
    eng.fixed_weights.clear();
  }
  if (config.lipschitz_auto) {
    eng.hp.lipschitz = estimate_lipschitz(problem.data.train, data_seed);
    spdlog::info("estimated lipschitz constant {:.6g}", eng.hp.lipschitz);
  }
  if (eng.delay.base.empty()) eng.delay.base.assign(n, 1.0);
  return problem;
}

AmbiguitySpec parse_ambiguity_json(const std::string& json_text,
                                   std::size_t workers) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ambiguity: ") + e.what());
  }
  return parse_ambiguity(j, workers);
}

}  // namespace aspire
