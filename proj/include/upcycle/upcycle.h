/* Copyright 2026 The Upcycle Simulator Authors
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

/* C interface to the simulator core. All complex results are returned as
 * JSON strings owned by the library; release them with upc_string_free.
 * Every entry point returns a status code; upc_last_error() describes the
 * most recent failure on the calling thread.
 */

#ifndef UPCYCLE_UPCYCLE_H_
#define UPCYCLE_UPCYCLE_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum upc_status {
  UPC_OK = 0,
  UPC_ERR_VALIDATION = 1, /* malformed trace, schema, or argument */
  UPC_ERR_IO = 2,         /* missing or unreadable file */
  UPC_ERR_INFEASIBLE = 3, /* config fails architectural validation */
  UPC_ERR_INTERNAL = 4
} upc_status;

typedef struct upc_trace upc_trace;
typedef struct upc_config upc_config;

const char* upc_last_error(void);
void upc_string_free(char* s);
const char* upc_version(void);

/* ---- traces ---- */
upc_status upc_trace_load(const char* path, upc_trace** out);
upc_status upc_trace_parse(const char* json_text, upc_trace** out);
void upc_trace_free(upc_trace* t);
/* Appends backward operators, producing a training trace. */
upc_status upc_trace_expand_backward(const upc_trace* t, upc_trace** out);
/* Applies a datatype ("int8" | "fp16" | "fp32") to every node and tensor. */
upc_status upc_trace_retarget(const upc_trace* t, const char* dtype, upc_trace** out);
/* Op counts, GOPs/sample, distinct shapes, primary fraction, as JSON. */
upc_status upc_trace_characterize(const upc_trace* t, char** json_out);

/* ---- machine configs ---- */
upc_status upc_config_preset(const char* name, upc_config** out);
upc_status upc_config_load(const char* path, upc_config** out);
upc_status upc_config_set(upc_config* cfg, const char* field, double value);
upc_status upc_config_validate(const upc_config* cfg);
/* Full field dump plus derived peak rates, as JSON. */
upc_status upc_config_describe(const upc_config* cfg, char** json_out);
void upc_config_free(upc_config* cfg);

/* ---- simulation ----
 * options_json (may be NULL): {
 *   "batch": int,                 default: trace header batch
 *   "bw_override_bytes_per_s": number,  0 or absent = config bandwidth
 *   "perfect_cache": bool,
 *   "weight_pinning": bool,       default true
 *   "coeffs_path": string,        default: UPCYCLE_COEFFS env or built-ins
 * }
 * Result JSON: run summary, per-operator rows, and the power/area report.
 */
upc_status upc_simulate(const upc_trace* t, const upc_config* cfg,
                        const char* options_json, char** json_out);

/* ---- design-space sweep ----
 * Evaluates the manifest's axis grid over its traces; returns one JSON
 * document with per-point metrics, geomeans, and Pareto flags, plus a CSV
 * rendering (one row per config x trace). Either output pointer may be NULL.
 */
upc_status upc_sweep(const char* manifest_path, const char* coeffs_path,
                     char** json_out, char** csv_out);

/* ---- published-baseline comparison ----
 * inputs_json: [{"app","mode","regime","dtype","ops_per_sample",
 *                "samples_per_s","pj_per_op"}, ...]
 */
upc_status upc_compare_a100(const char* inputs_json, char** json_out);
/* The embedded published baseline values themselves. */
upc_status upc_baseline_table(char** json_out);

/* ---- microkernel bench ----
 * Emulates the register-tiled kernel for one GEMM shape and reports the
 * selected tiling, instruction census, and cycle counts, as JSON.
 */
upc_status upc_microbench(const upc_config* cfg, const char* dtype, int64_t m,
                          int64_t n, int64_t k, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* UPCYCLE_UPCYCLE_H_ */
