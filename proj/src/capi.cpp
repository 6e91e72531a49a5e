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

#include "aspire/aspire.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "aspire/config.hpp"
#include "aspire/error.hpp"
#include "aspire/experiments.hpp"

struct aspire_config {
  aspire::ExperimentConfig cfg;
};

struct aspire_summary {
  aspire::RunSummary summary;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

aspire_status fail(aspire_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

// Funnels every C++ exception into a status code. Nothing escapes the ABI.
template <typename F>
aspire_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return ASPIRE_OK;
  } catch (const aspire::Error& e) {
    return fail(static_cast<aspire_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ASPIRE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ASPIRE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ASPIRE_ERR_INTERNAL, "unknown error");
  }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

extern "C" {

const char* aspire_version(void) { return "1.0.0"; }

aspire_status aspire_set_log_level(const char* level) {
  if (!level) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null level");
  const auto lvl = spdlog::level::from_str(level);
  // from_str maps unknown names to off; only accept that for "off" itself.
  if (lvl == spdlog::level::off && std::string(level) != "off") {
    return fail(ASPIRE_ERR_INVALID_ARGUMENT,
                std::string("unknown log level '") + level + "'");
  }
  spdlog::set_level(lvl);
  return ASPIRE_OK;
}

const char* aspire_last_error(void) { return g_last_error.c_str(); }

aspire_status aspire_config_load(const char* path, aspire_config** out) {
  if (!path || !out) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<aspire_config>();
    h->cfg = aspire::load_config(path);
    *out = h.release();
  });
}

aspire_status aspire_config_parse(const char* json_text, aspire_config** out) {
  if (!json_text || !out) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<aspire_config>();
    h->cfg = aspire::parse_config(json_text);
    *out = h.release();
  });
}

void aspire_config_free(aspire_config* config) { delete config; }

aspire_status aspire_config_set_seed(aspire_config* config, uint64_t seed) {
  if (!config) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null config");
  config->cfg.engine.seed = seed;
  return ASPIRE_OK;
}

aspire_status aspire_config_set_eps(aspire_config* config, double eps) {
  if (!config) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null config");
  if (!(eps > 0.0)) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "eps must be positive");
  config->cfg.engine.eps = eps;
  return ASPIRE_OK;
}

aspire_status aspire_config_set_max_iters(aspire_config* config,
                                          size_t max_iters) {
  if (!config) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null config");
  if (max_iters == 0) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "max_iters must be positive");
  config->cfg.engine.max_iters = max_iters;
  return ASPIRE_OK;
}

aspire_status aspire_config_set_output_dir(aspire_config* config,
                                           const char* dir) {
  if (!config || !dir) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null argument");
  config->cfg.output_dir = dir;
  return ASPIRE_OK;
}

aspire_status aspire_run(const aspire_config* config, aspire_summary** out) {
  if (!config) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null config");
  if (out) *out = nullptr;
  return guarded([&] {
    auto s = aspire::cmd_run(config->cfg);
    if (out) {
      auto h = std::make_unique<aspire_summary>();
      h->json = aspire::summary_to_json(s);
      h->summary = std::move(s);
      *out = h.release();
    }
  });
}

void aspire_summary_free(aspire_summary* summary) { delete summary; }

double aspire_summary_final_gap(const aspire_summary* s) {
  return s ? s->summary.final_gap : kNaN;
}

int aspire_summary_converged(const aspire_summary* s) {
  return s && s->summary.converged ? 1 : 0;
}

int64_t aspire_summary_t_eps(const aspire_summary* s) {
  if (!s || !s->summary.t_eps) return -1;
  return static_cast<int64_t>(*s->summary.t_eps);
}

size_t aspire_summary_iterations(const aspire_summary* s) {
  return s ? s->summary.iterations : 0;
}

double aspire_summary_loss_worst(const aspire_summary* s) {
  return s ? s->summary.metrics.loss_worst : kNaN;
}

double aspire_summary_loss_mean(const aspire_summary* s) {
  return s ? s->summary.metrics.loss_mean : kNaN;
}

double aspire_summary_acc_worst(const aspire_summary* s) {
  return s ? s->summary.metrics.acc_worst : kNaN;
}

double aspire_summary_attack_rate(const aspire_summary* s) {
  return s && s->summary.attack_rate ? *s->summary.attack_rate : kNaN;
}

aspire_status aspire_summary_json(const aspire_summary* s, char* buf,
                                  size_t cap, size_t* len) {
  if (!s) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null summary");
  if (len) *len = s->json.size();
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s->json.size());
    std::memcpy(buf, s->json.data(), n);
    buf[n] = '\0';
  }
  return ASPIRE_OK;
}

aspire_status aspire_sweep_gamma(const aspire_config* config,
                                 const double* gammas, size_t count) {
  if (!config || (!gammas && count > 0)) {
    return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    aspire::sweep_gamma(config->cfg, aspire::Vec(gammas, gammas + count));
  });
}

aspire_status aspire_compare_modes(const aspire_config* config) {
  if (!config) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { aspire::compare_modes(config->cfg); });
}

aspire_status aspire_baseline(const aspire_config* config) {
  if (!config) return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { aspire::baseline(config->cfg); });
}

aspire_status aspire_bench_uncertainty(const char* kinds, const size_t* sizes,
                                       size_t count, size_t repetitions,
                                       uint64_t seed, const char* out_dir) {
  if (!sizes || count == 0 || !out_dir) {
    return fail(ASPIRE_ERR_INVALID_ARGUMENT, "sizes and out_dir are required");
  }
  return guarded([&] {
    std::vector<aspire::AmbiguityKind> ks;
    std::string list = kinds ? kinds : "cdnorm,box,polyhedron";
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) ks.push_back(aspire::parse_ambiguity_kind(item));
    }
    if (ks.empty()) throw aspire::InvalidArgument("no ambiguity kinds given");
    aspire::bench_uncertainty(ks, std::vector<std::size_t>(sizes, sizes + count),
                              repetitions, seed, out_dir);
  });
}

aspire_status aspire_solve_ambiguity(const char* spec_json, const double* f,
                                     size_t n, double p_bar, double* p_out,
                                     double* value_out) {
  if (!spec_json || !f || !p_out || n == 0) {
    return fail(ASPIRE_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto spec = aspire::parse_ambiguity_json(spec_json, n);
    const auto wc = aspire::solve_worst_case(spec, std::span<const double>(f, n), p_bar);
    std::copy(wc.p.begin(), wc.p.end(), p_out);
    if (value_out) *value_out = wc.value;
  });
}

}  // extern "C"
