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

// Uses nothing but the public C header and the shared library.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "aspire/aspire.h"

namespace {

std::string demo_path() { return std::string(ASPIRE_CONFIG_DIR) + "/quadratic_demo.json"; }

std::string scratch(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() / (std::string("aspire_capi_") + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

TEST(CApi, Version) { EXPECT_STREQ(aspire_version(), "1.0.0"); }

TEST(CApi, LoadMissingFile) {
  aspire_config* cfg = nullptr;
  EXPECT_EQ(aspire_config_load("/no/such/file.json", &cfg), ASPIRE_ERR_IO);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(aspire_last_error()).find("/no/such/file.json"), std::string::npos);
}

TEST(CApi, NullArguments) {
  EXPECT_EQ(aspire_config_load(nullptr, nullptr), ASPIRE_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(aspire_run(nullptr, nullptr), ASPIRE_ERR_INVALID_ARGUMENT);
  aspire_config_free(nullptr);
  aspire_summary_free(nullptr);
}

TEST(CApi, ParseError) {
  aspire_config* cfg = nullptr;
  EXPECT_EQ(aspire_config_parse("{\"seed\": ", &cfg), ASPIRE_ERR_CONFIG);
  EXPECT_STRNE(aspire_last_error(), "");
}

TEST(CApi, LogLevel) {
  EXPECT_EQ(aspire_set_log_level("warn"), ASPIRE_OK);
  EXPECT_EQ(aspire_set_log_level("loud"), ASPIRE_ERR_INVALID_ARGUMENT);
}

TEST(CApi, RunQuadraticDemo) {
  aspire_config* cfg = nullptr;
  ASSERT_EQ(aspire_config_load(demo_path().c_str(), &cfg), ASPIRE_OK);
  const std::string out = scratch("run");
  ASSERT_EQ(aspire_config_set_output_dir(cfg, out.c_str()), ASPIRE_OK);
  aspire_summary* s = nullptr;
  ASSERT_EQ(aspire_run(cfg, &s), ASPIRE_OK) << aspire_last_error();
  EXPECT_EQ(aspire_summary_converged(s), 1);
  EXPECT_LE(aspire_summary_final_gap(s), 1e-4);
  EXPECT_GE(aspire_summary_t_eps(s), 0);
  EXPECT_EQ(static_cast<std::int64_t>(aspire_summary_iterations(s)),
            aspire_summary_t_eps(s) + 1);
  EXPECT_GE(aspire_summary_loss_worst(s), aspire_summary_loss_mean(s));
  EXPECT_TRUE(std::isnan(aspire_summary_acc_worst(s)));
  EXPECT_TRUE(std::isnan(aspire_summary_attack_rate(s)));

  std::size_t len = 0;
  ASSERT_EQ(aspire_summary_json(s, nullptr, 0, &len), ASPIRE_OK);
  std::vector<char> buf(len + 1);
  ASSERT_EQ(aspire_summary_json(s, buf.data(), buf.size(), &len), ASPIRE_OK);
  EXPECT_NE(std::string(buf.data()).find("\"converged\": true"), std::string::npos);
  char small[8];
  ASSERT_EQ(aspire_summary_json(s, small, sizeof small, &len), ASPIRE_OK);
  EXPECT_EQ(std::string(small), std::string(buf.data(), 7));

  aspire_summary_free(s);
  aspire_config_free(cfg);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / "runlog.jsonl"));
  std::filesystem::remove_all(out);
}

TEST(CApi, Overrides) {
  aspire_config* cfg = nullptr;
  ASSERT_EQ(aspire_config_load(demo_path().c_str(), &cfg), ASPIRE_OK);
  const std::string out = scratch("override");
  aspire_config_set_output_dir(cfg, out.c_str());
  EXPECT_EQ(aspire_config_set_max_iters(cfg, 0), ASPIRE_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(aspire_config_set_eps(cfg, -1.0), ASPIRE_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(aspire_config_set_max_iters(cfg, 25), ASPIRE_OK);
  ASSERT_EQ(aspire_config_set_seed(cfg, 99), ASPIRE_OK);
  aspire_summary* s = nullptr;
  ASSERT_EQ(aspire_run(cfg, &s), ASPIRE_OK);
  EXPECT_EQ(aspire_summary_iterations(s), 25u);
  EXPECT_EQ(aspire_summary_t_eps(s), -1);
  aspire_summary_free(s);
  aspire_config_free(cfg);
  std::filesystem::remove_all(out);
}

TEST(CApi, SweepAndBench) {
  aspire_config* cfg = nullptr;
  ASSERT_EQ(aspire_config_load(demo_path().c_str(), &cfg), ASPIRE_OK);
  const std::string out = scratch("sweep");
  aspire_config_set_output_dir(cfg, out.c_str());
  const double gammas[] = {0.0, 1.0};
  EXPECT_EQ(aspire_sweep_gamma(cfg, gammas, 2), ASPIRE_OK);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / "sweep.csv"));
  EXPECT_EQ(aspire_sweep_gamma(cfg, nullptr, 2), ASPIRE_ERR_INVALID_ARGUMENT);
  aspire_config_free(cfg);
  const std::size_t sizes[] = {16};
  EXPECT_EQ(aspire_bench_uncertainty("cdnorm,box", sizes, 1, 2, 1, out.c_str()), ASPIRE_OK);
  EXPECT_EQ(aspire_bench_uncertainty("ball", sizes, 1, 2, 1, out.c_str()),
            ASPIRE_ERR_INVALID_ARGUMENT);
  std::filesystem::remove_all(out);
}

TEST(CApi, SolveAmbiguity) {
  const double f[] = {1.0, 0.0};
  double p[2] = {0.0, 0.0};
  double value = 0.0;
  ASSERT_EQ(aspire_solve_ambiguity(
                R"({"kind": "cdnorm", "q": [0.5, 0.5], "p_tilde": 0.5, "budget": 2})", f, 2,
                0.5, p, &value),
            ASPIRE_OK);
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_NEAR(value, 0.5, 1e-12);
  EXPECT_EQ(aspire_solve_ambiguity(R"({"kind": "box", "lower": [0.6, 0.6], "upper": [1, 1]})",
                                   f, 2, 0.5, p, nullptr),
            ASPIRE_ERR_CONFIG);
  EXPECT_NE(std::string(aspire_last_error()).find("ambiguity"), std::string::npos);
  EXPECT_EQ(aspire_solve_ambiguity(R"({"kind": "cdnorm", "q": [0.5, 0.5], "p_tilde": 0.5,
                                       "budget": 2})",
                                   f, 3, 0.5, p, nullptr),
            ASPIRE_ERR_CONFIG);
}

}  // namespace
