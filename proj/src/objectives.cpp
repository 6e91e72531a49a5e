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

#include "aspire/objectives.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "aspire/random.hpp"

namespace aspire {

namespace {

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

RowMatrix with_bias(const Eigen::MatrixXd& features) {
  RowMatrix x(features.rows(), features.cols() + 1);
  x.leftCols(features.cols()) = features;
  x.col(features.cols()).setOnes();
  return x;
}

// Row-wise log-softmax of the logits.
RowMatrix log_softmax(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

LocalObjective LocalObjective::quadratic(Vec center, double curvature) {
  if (!(curvature > 0.0)) throw InvalidArgument("curvature must be > 0");
  if (center.empty()) throw InvalidArgument("quadratic center must be nonempty");
  LocalObjective o;
  o.kind_ = ObjectiveKind::kQuadratic;
  o.center_ = std::move(center);
  o.curvature_ = curvature;
  return o;
}

LocalObjective LocalObjective::softmax(Eigen::MatrixXd features,
                                       std::vector<int> labels, int classes,
                                       double mu) {
  if (classes < 2) throw InvalidArgument("softmax needs at least 2 classes");
  if (!(mu >= 0.0)) throw InvalidArgument("mu must be >= 0");
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DimensionMismatch("feature rows must match label count");
  }
  if (labels.empty()) throw InvalidArgument("softmax objective needs samples");
  if (!features.allFinite()) throw InvalidArgument("non-finite feature value");
  for (int y : labels) {
    if (y < 1 || y > classes) {
      throw InvalidArgument("label " + std::to_string(y) + " outside 1.." +
                            std::to_string(classes));
    }
  }
  LocalObjective o;
  o.kind_ = ObjectiveKind::kSoftmax;
  o.x_ = with_bias(features);
  o.labels_ = std::move(labels);
  o.classes_ = classes;
  o.mu_ = mu;
  return o;
}

std::size_t LocalObjective::dim() const {
  if (kind_ == ObjectiveKind::kQuadratic) return center_.size();
  return static_cast<std::size_t>(classes_) * static_cast<std::size_t>(x_.cols());
}

std::size_t LocalObjective::samples() const {
  return kind_ == ObjectiveKind::kQuadratic ? 0 : labels_.size();
}

std::size_t LocalObjective::feature_dim() const {
  return kind_ == ObjectiveKind::kQuadratic
             ? 0
             : static_cast<std::size_t>(x_.cols() - 1);
}

Eigen::MatrixXd LocalObjective::features() const {
  if (kind_ == ObjectiveKind::kQuadratic) return {};
  return x_.leftCols(x_.cols() - 1);
}

void LocalObjective::set_report_scale(double s) {
  if (!(s >= 1.0)) throw InvalidArgument("loss inflation must be >= 1");
  report_scale_ = s;
}

void LocalObjective::check_dim(std::span<const double> w) const {
  if (w.size() != dim()) {
    throw DimensionMismatch("model has " + std::to_string(w.size()) +
                            " entries, objective expects " +
                            std::to_string(dim()));
  }
}

double LocalObjective::loss(std::span<const double> w) const {
  return loss_and_grad(w).first;
}

Vec LocalObjective::grad(std::span<const double> w) const {
  return loss_and_grad(w).second;
}

std::pair<double, Vec> LocalObjective::loss_and_grad(
    std::span<const double> w) const {
  check_dim(w);
  Vec g(w.size());
  if (kind_ == ObjectiveKind::kQuadratic) {
    double f = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = w[i] - center_[i];
      f += d * d;
      g[i] = curvature_ * d;
    }
    return {0.5 * curvature_ * f, std::move(g)};
  }
  const ConstRowMap wm(w.data(), classes_, x_.cols());
  const RowMatrix logp = log_softmax(x_ * wm.transpose());
  const auto n = static_cast<double>(labels_.size());
  RowMatrix resid = logp.array().exp();
  double f = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    f -= logp(r, labels_[i] - 1);
    resid(r, labels_[i] - 1) -= 1.0;
  }
  f /= n;
  RowMap gm(g.data(), classes_, x_.cols());
  gm = resid.transpose() * x_ / n + mu_ * wm;
  f += 0.5 * mu_ * wm.squaredNorm();
  return {f, std::move(g)};
}

double LocalObjective::lipschitz() const {
  if (kind_ == ObjectiveKind::kQuadratic) return curvature_;
  return 0.5 * x_.squaredNorm() / static_cast<double>(labels_.size()) + mu_;
}

int LocalObjective::predict(std::span<const double> w, std::size_t row) const {
  if (kind_ != ObjectiveKind::kSoftmax) {
    throw InvalidArgument("prediction needs a softmax objective");
  }
  check_dim(w);
  const ConstRowMap wm(w.data(), classes_, x_.cols());
  const Eigen::VectorXd logits = wm * x_.row(static_cast<Eigen::Index>(row)).transpose();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < logits.size(); ++k) {
    if (logits(k) > logits(best)) best = k;
  }
  return static_cast<int>(best) + 1;
}

double LocalObjective::accuracy(std::span<const double> w) const {
  if (kind_ != ObjectiveKind::kSoftmax) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (predict(w, i) == labels_[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels_.size());
}

double estimate_lipschitz(const std::vector<LocalObjective>& objectives,
                          std::uint64_t seed, std::size_t pairs,
                          double radius) {
  Rng rng(seed);
  double best = 0.0;
  for (const auto& obj : objectives) {
    Vec a(obj.dim()), b(obj.dim());
    for (std::size_t k = 0; k < pairs; ++k) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(-radius, radius);
        b[i] = rng.uniform(-radius, radius);
      }
      const Vec ga = obj.grad(a);
      const Vec gb = obj.grad(b);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ga[i] - gb[i]) * (ga[i] - gb[i]);
        den += (a[i] - b[i]) * (a[i] - b[i]);
      }
      if (den > 0.0) best = std::max(best, std::sqrt(num / den));
    }
  }
  return best;
}

WorkerData make_scenario(const ScenarioSpec& spec, std::size_t workers,
                         std::uint64_t seed) {
  if (workers == 0) throw InvalidArgument("scenario needs at least one worker");
  if (spec.dim == 0) throw InvalidArgument("scenario dimension must be >= 1");
  if (spec.skew < 0.0) throw InvalidArgument("skew must be >= 0");
  Rng rng(seed);
  WorkerData out;
  if (spec.kind == ObjectiveKind::kQuadratic) {
    Vec base(spec.dim);
    for (double& x : base) x = rng.normal();
    for (std::size_t j = 0; j < workers; ++j) {
      Vec c(base);
      for (double& x : c) x += spec.skew * spec.spread * rng.normal();
      out.train.push_back(LocalObjective::quadratic(c, spec.curvature));
    }
    out.test = out.train;
    return out;
  }

  if (spec.skew > 1.0 && spec.split == "skew") {
    throw InvalidArgument("label skew must lie in [0, 1]");
  }
  if (spec.split != "skew" && spec.split != "one_class") {
    throw InvalidArgument("unknown split '" + spec.split + "'");
  }
  const int c = spec.classes;
  if (c < 2) throw InvalidArgument("softmax scenario needs >= 2 classes");
  const auto d = static_cast<Eigen::Index>(spec.dim);
  Eigen::MatrixXd means(c, d);
  for (Eigen::Index k = 0; k < c; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) means(k, i) = spec.separation * rng.normal();
  }
  for (std::size_t j = 0; j < workers; ++j) {
    const int preferred = static_cast<int>(j % static_cast<std::size_t>(c));
    Eigen::VectorXd shift(d);
    for (Eigen::Index i = 0; i < d; ++i) shift(i) = spec.skew * spec.shift * rng.normal();
    auto draw = [&](std::size_t n) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
      std::vector<int> y(n);
      for (std::size_t s = 0; s < n; ++s) {
        int label = preferred;
        if (spec.split == "skew" && !(rng.uniform() < spec.skew)) {
          label = static_cast<int>(rng.index(static_cast<std::uint64_t>(c)));
        }
        y[s] = label + 1;
        for (Eigen::Index i = 0; i < d; ++i) {
          x(static_cast<Eigen::Index>(s), i) =
              means(label, i) + shift(i) + spec.noise * rng.normal();
        }
      }
      return LocalObjective::softmax(std::move(x), std::move(y), c, spec.mu);
    };
    out.train.push_back(draw(spec.samples));
    out.test.push_back(draw(spec.test_samples));
  }
  return out;
}

std::vector<LocalObjective> make_heterogeneous(const ScenarioSpec& spec,
                                               std::size_t workers,
                                               std::uint64_t seed) {
  return make_scenario(spec, workers, seed).train;
}

MaliciousOutcome apply_malicious(const WorkerData& data,
                                 const MaliciousSpec& spec,
                                 std::uint64_t seed) {
  if (spec.fraction < 0.0 || spec.fraction > 1.0) {
    throw InvalidArgument("poison fraction must lie in [0, 1]");
  }
  if (!(spec.inflation >= 1.0)) throw InvalidArgument("inflation must be >= 1");
  if (spec.worker >= data.train.size()) {
    throw InvalidArgument("malicious worker index out of range");
  }
  MaliciousOutcome out;
  if (spec.fraction == 0.0 && spec.inflation == 1.0) {
    out.data = data;
    return out;
  }
  const auto& attacker = data.train[spec.worker];
  if (attacker.kind() != ObjectiveKind::kSoftmax) {
    out.data = data;
    out.data.train[spec.worker].set_report_scale(spec.inflation);
    return out;
  }
  const int c = attacker.classes();
  if (spec.target_label < 1 || spec.target_label > c) {
    throw InvalidArgument("target label outside 1..c");
  }
  auto add_trigger = [&](const LocalObjective& o) {
    Eigen::MatrixXd x = o.features();
    x.conservativeResize(Eigen::NoChange, x.cols() + 1);
    x.col(x.cols() - 1).setZero();
    return std::pair{x, o.labels()};
  };
  Rng rng(seed);
  for (std::size_t j = 0; j < data.train.size(); ++j) {
    auto [x, y] = add_trigger(data.train[j]);
    if (j == spec.worker) {
      const std::size_t n = y.size();
      const auto k = static_cast<std::size_t>(
          std::llround(spec.fraction * static_cast<double>(n)));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
        std::swap(idx[i - 1], idx[rng.index(i)]);
      }
      for (std::size_t s = 0; s < k; ++s) {
        const auto r = static_cast<Eigen::Index>(idx[s]);
        x(r, x.cols() - 1) = spec.trigger_value;
        y[idx[s]] = spec.target_label;
      }
    }
    auto obj = LocalObjective::softmax(std::move(x), std::move(y), c,
                                       data.train[j].mu());
    if (j == spec.worker) obj.set_report_scale(spec.inflation);
    out.data.train.push_back(std::move(obj));
  }
  std::vector<Eigen::VectorXd> rows;
  std::vector<int> truth;
  for (std::size_t j = 0; j < data.test.size(); ++j) {
    auto [x, y] = add_trigger(data.test[j]);
    out.data.test.push_back(
        LocalObjective::softmax(x, y, c, data.test[j].mu()));
    if (j == spec.worker) continue;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (y[static_cast<std::size_t>(r)] == spec.target_label) continue;
      Eigen::VectorXd row = x.row(r).transpose();
      row(row.size() - 1) = spec.trigger_value;
      rows.push_back(std::move(row));
      truth.push_back(y[static_cast<std::size_t>(r)]);
    }
  }
  if (!rows.empty()) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    }
    out.backdoor = LocalObjective::softmax(std::move(x), std::move(truth), c,
                                           attacker.mu());
  }
  return out;
}

IngestResult ingest_csv(const std::string& path, const CsvSchema& schema,
                        double mu, int classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  if (schema.feature_cols.empty()) {
    throw ConfigError("schema must name at least one feature column");
  }
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset '" + path + "' is empty");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ConfigError("dataset '" + path + "' has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> fcols;
  for (const auto& name : schema.feature_cols) fcols.push_back(column(name));
  const std::size_t lcol = column(schema.label_col);
  const std::size_t wcol = column(schema.worker_col);

  std::vector<std::string> ids;
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<Vec>> feats;
  std::vector<std::vector<int>> labels;
  std::size_t lineno = 1;
  int max_label = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    Vec row(fcols.size());
    for (std::size_t k = 0; k < fcols.size(); ++k) {
      if (!parse_double(cells[fcols[k]], row[k])) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": column '" +
                          schema.feature_cols[k] + "' is not numeric");
      }
    }
    double label_value = 0.0;
    if (!parse_double(cells[lcol], label_value) ||
        label_value != std::floor(label_value) || label_value < 1.0) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": label must be an integer >= 1");
    }
    const int label = static_cast<int>(label_value);
    if (classes > 0 && label > classes) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": label " +
                        std::to_string(label) + " outside 1.." +
                        std::to_string(classes));
    }
    max_label = std::max(max_label, label);
    const std::string& id = cells[wcol];
    if (schema.num_workers) {
      double v = 0.0;
      if (!parse_double(id, v) || v != std::floor(v) || v < 0.0 ||
          v >= static_cast<double>(*schema.num_workers)) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": worker id '" +
                          id + "' outside 0.." +
                          std::to_string(*schema.num_workers - 1));
      }
    }
    auto [it, inserted] = slot.try_emplace(id, ids.size());
    if (inserted) {
      ids.push_back(id);
      feats.emplace_back();
      labels.emplace_back();
    }
    feats[it->second].push_back(std::move(row));
    labels[it->second].push_back(label);
  }
  if (ids.empty()) throw ConfigError("dataset '" + path + "' has no rows");

  // Integer worker ids sort numerically when a worker count is declared.
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  if (schema.num_workers) {
    if (ids.size() != *schema.num_workers) {
      throw ConfigError("dataset '" + path + "' leaves " +
                        std::to_string(*schema.num_workers - ids.size()) +
                        " worker partition(s) empty");
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::stod(ids[a]) < std::stod(ids[b]);
    });
  }

  const std::size_t d = fcols.size();
  IngestResult res;
  res.classes = classes > 0 ? classes : std::max(max_label, 2);
  res.mean.assign(d, 0.0);
  res.stddev.assign(d, 0.0);
  std::size_t total = 0;
  for (const auto& part : feats) {
    for (const auto& row : part) {
      for (std::size_t k = 0; k < d; ++k) res.mean[k] += row[k];
      ++total;
    }
  }
  for (double& m : res.mean) m /= static_cast<double>(total);
  for (const auto& part : feats) {
    for (const auto& row : part) {
      for (std::size_t k = 0; k < d; ++k) {
        res.stddev[k] += (row[k] - res.mean[k]) * (row[k] - res.mean[k]);
      }
    }
  }
  for (double& s : res.stddev) s = std::sqrt(s / static_cast<double>(total));

  for (std::size_t o : order) {
    const auto& part = feats[o];
    Eigen::MatrixXd x(static_cast<Eigen::Index>(part.size()),
                      static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < part.size(); ++r) {
      for (std::size_t k = 0; k < d; ++k) {
        const double s = res.stddev[k] > 0.0 ? res.stddev[k] : 1.0;
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
            (part[r][k] - res.mean[k]) / s;
      }
    }
    res.objectives.push_back(
        LocalObjective::softmax(std::move(x), labels[o], res.classes, mu));
    res.worker_ids.push_back(ids[o]);
    spdlog::info("ingested worker '{}': {} rows", ids[o], part.size());
  }
  return res;
}

void write_dataset_csv(const std::string& path,
                       const std::vector<LocalObjective>& objectives) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  if (objectives.empty()) throw InvalidArgument("no objectives to write");
  const std::size_t d = objectives.front().feature_dim();
  for (std::size_t k = 0; k < d; ++k) out << 'f' << k << ',';
  out << "label,worker\n";
  out.precision(17);
  for (std::size_t j = 0; j < objectives.size(); ++j) {
    const auto& o = objectives[j];
    if (o.kind() != ObjectiveKind::kSoftmax) {
      throw InvalidArgument("only softmax objectives can be written as CSV");
    }
    const Eigen::MatrixXd x = o.features();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index k = 0; k < x.cols(); ++k) out << x(r, k) << ',';
      out << o.labels()[static_cast<std::size_t>(r)] << ',' << j << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace aspire
