/*
 * Copyright 2026 The ASPIRE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Stable C interface to libaspire. Every call returns an aspire_status;
 * on failure aspire_last_error() describes the problem for the calling
 * thread. Handles are opaque and owned by the caller. */

#ifndef ASPIRE_ASPIRE_H_
#define ASPIRE_ASPIRE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ASPIRE_BUILDING_LIBRARY)
#    define ASPIRE_API __declspec(dllexport)
#  else
#    define ASPIRE_API __declspec(dllimport)
#  endif
#else
#  define ASPIRE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aspire_status {
  ASPIRE_OK = 0,
  ASPIRE_ERR_INVALID_ARGUMENT = 1,
  ASPIRE_ERR_DIMENSION_MISMATCH = 2,
  ASPIRE_ERR_INFEASIBLE = 3,
  ASPIRE_ERR_UNBOUNDED = 4,
  ASPIRE_ERR_CONFIG = 5,
  ASPIRE_ERR_IO = 6,
  ASPIRE_ERR_NUMERICAL = 7,
  ASPIRE_ERR_INTERNAL = 8
} aspire_status;

typedef struct aspire_config aspire_config;
typedef struct aspire_summary aspire_summary;

ASPIRE_API const char* aspire_version(void);

/* trace | debug | info | warn | error | critical | off. */
ASPIRE_API aspire_status aspire_set_log_level(const char* level);

/* Message for the most recent failure on this thread; "" if none. */
ASPIRE_API const char* aspire_last_error(void);

ASPIRE_API aspire_status aspire_config_load(const char* path,
                                            aspire_config** out);
ASPIRE_API aspire_status aspire_config_parse(const char* json_text,
                                             aspire_config** out);
ASPIRE_API void aspire_config_free(aspire_config* config);

ASPIRE_API aspire_status aspire_config_set_seed(aspire_config* config,
                                                uint64_t seed);
ASPIRE_API aspire_status aspire_config_set_eps(aspire_config* config,
                                               double eps);
ASPIRE_API aspire_status aspire_config_set_max_iters(aspire_config* config,
                                                     size_t max_iters);
ASPIRE_API aspire_status aspire_config_set_output_dir(aspire_config* config,
                                                      const char* dir);

/* Writes runlog.jsonl, runlog.csv and summary.json. A non-converged run is
 * still ASPIRE_OK; inspect the summary. */
ASPIRE_API aspire_status aspire_run(const aspire_config* config,
                                    aspire_summary** out);
ASPIRE_API void aspire_summary_free(aspire_summary* summary);

ASPIRE_API double aspire_summary_final_gap(const aspire_summary* summary);
ASPIRE_API int aspire_summary_converged(const aspire_summary* summary);
/* -1 when the run never reached eps. */
ASPIRE_API int64_t aspire_summary_t_eps(const aspire_summary* summary);
ASPIRE_API size_t aspire_summary_iterations(const aspire_summary* summary);
ASPIRE_API double aspire_summary_loss_worst(const aspire_summary* summary);
ASPIRE_API double aspire_summary_loss_mean(const aspire_summary* summary);
/* NaN for objectives without a notion of accuracy. */
ASPIRE_API double aspire_summary_acc_worst(const aspire_summary* summary);
/* NaN unless an attack probe was configured. */
ASPIRE_API double aspire_summary_attack_rate(const aspire_summary* summary);
/* Copies the summary JSON into buf (NUL-terminated, truncated to cap) and
 * stores the full length in *len. */
ASPIRE_API aspire_status aspire_summary_json(const aspire_summary* summary,
                                             char* buf, size_t cap,
                                             size_t* len);

ASPIRE_API aspire_status aspire_sweep_gamma(const aspire_config* config,
                                            const double* gammas, size_t count);
ASPIRE_API aspire_status aspire_compare_modes(const aspire_config* config);
ASPIRE_API aspire_status aspire_baseline(const aspire_config* config);

/* kinds: comma-separated ambiguity names, or NULL for cdnorm,box,polyhedron. */
ASPIRE_API aspire_status aspire_bench_uncertainty(const char* kinds,
                                                  const size_t* sizes,
                                                  size_t count,
                                                  size_t repetitions,
                                                  uint64_t seed,
                                                  const char* out_dir);

/* One-shot worst-case solve. spec_json uses the config file's "ambiguity"
 * section; p_out receives n entries; value_out may be NULL. */
ASPIRE_API aspire_status aspire_solve_ambiguity(const char* spec_json,
                                                const double* f, size_t n,
                                                double p_bar, double* p_out,
                                                double* value_out);

#ifdef __cplusplus
}
#endif

#endif /* ASPIRE_ASPIRE_H_ */
