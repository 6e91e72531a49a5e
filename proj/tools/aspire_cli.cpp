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

// aspire: command-line front end over the C interface.
//
//   aspire run --config cfg.json [--out dir] [--seed n] [--eps e] [--max-iters n]
//   aspire sweep-gamma --config cfg.json --gammas 0,0.5,1,2
//   aspire compare-modes --config cfg.json
//   aspire baseline --config cfg.json
//   aspire bench-uncertainty [--kinds cdnorm,box] [--sizes 256,1024] [--out dir]

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aspire/aspire.h"

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<std::size_t> max_iters;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "experiment JSON")->required();
  sub->add_option("--out", c.out, "output directory (overrides config)");
  sub->add_option("--seed", c.seed, "RNG seed (overrides config)");
  sub->add_option("--eps", c.eps, "stationarity target (overrides config)");
  sub->add_option("--max-iters", c.max_iters, "master iteration cap");
}

int report(aspire_status st) {
  if (st == ASPIRE_OK) return 0;
  std::fprintf(stderr, "aspire: error: %s\n", aspire_last_error());
  // Distinct codes for the failures a script is likely to branch on.
  switch (st) {
    case ASPIRE_ERR_CONFIG: return 2;
    case ASPIRE_ERR_IO: return 3;
    case ASPIRE_ERR_INVALID_ARGUMENT: return 4;
    default: return 1;
  }
}

// Loads the config and applies CLI overrides. Returns nullptr after
// printing the error.
aspire_config* load(const Common& c, int& code) {
  aspire_config* cfg = nullptr;
  aspire_status st = aspire_config_load(c.config.c_str(), &cfg);
  if (st == ASPIRE_OK && c.out) st = aspire_config_set_output_dir(cfg, c.out->c_str());
  if (st == ASPIRE_OK && c.seed) st = aspire_config_set_seed(cfg, *c.seed);
  if (st == ASPIRE_OK && c.eps) st = aspire_config_set_eps(cfg, *c.eps);
  if (st == ASPIRE_OK && c.max_iters) st = aspire_config_set_max_iters(cfg, *c.max_iters);
  if (st != ASPIRE_OK) {
    code = report(st);
    aspire_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* lvl = std::getenv("ASPIRE_LOG_LEVEL")) {
    if (aspire_set_log_level(lvl) != ASPIRE_OK) {
      std::fprintf(stderr, "aspire: warning: %s\n", aspire_last_error());
    }
  }

  CLI::App app{"Distributionally robust training across heterogeneous workers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(aspire_version()));

  Common run_opts, sweep_opts, cmp_opts, base_opts;
  auto* run = app.add_subcommand("run", "single end-to-end experiment");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep-gamma", "one run per CD-norm budget");
  add_common(sweep, sweep_opts);
  std::vector<double> gammas;
  sweep->add_option("--gammas", gammas, "comma-separated budgets")
      ->required()
      ->delimiter(',');

  auto* cmp = app.add_subcommand("compare-modes", "{ease, cp} x {S=1, S=N, adaptive}");
  add_common(cmp, cmp_opts);

  auto* base = app.add_subcommand("baseline", "DRO next to even weights");
  add_common(base, base_opts);

  auto* bench = app.add_subcommand("bench-uncertainty", "time the worst-case solvers");
  std::string kinds = "cdnorm,box,polyhedron";
  std::vector<std::size_t> sizes{256, 1024, 4096};
  std::size_t reps = 20;
  std::uint64_t bench_seed = 1;
  std::string bench_out = "out";
  bench->add_option("--kinds", kinds, "comma-separated ambiguity kinds");
  bench->add_option("--sizes", sizes, "comma-separated worker counts")->delimiter(',');
  bench->add_option("--reps", reps, "repetitions per size")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "instance seed");
  bench->add_option("--out", bench_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  int code = 0;
  if (*bench) {
    return report(aspire_bench_uncertainty(kinds.c_str(), sizes.data(), sizes.size(),
                                           reps, bench_seed, bench_out.c_str()));
  }

  const Common& opts = *run ? run_opts : *sweep ? sweep_opts : *cmp ? cmp_opts : base_opts;
  aspire_config* cfg = load(opts, code);
  if (!cfg) return code;

  aspire_status st = ASPIRE_OK;
  if (*run) {
    aspire_summary* summary = nullptr;
    st = aspire_run(cfg, &summary);
    if (st == ASPIRE_OK) {
      std::size_t len = 0;
      aspire_summary_json(summary, nullptr, 0, &len);
      std::string text(len + 1, '\0');
      aspire_summary_json(summary, text.data(), text.size(), &len);
      text.resize(len);
      std::fputs(text.c_str(), stdout);
    }
    aspire_summary_free(summary);
  } else if (*sweep) {
    st = aspire_sweep_gamma(cfg, gammas.data(), gammas.size());
  } else if (*cmp) {
    st = aspire_compare_modes(cfg);
  } else {
    st = aspire_baseline(cfg);
  }
  aspire_config_free(cfg);
  return report(st);
}
