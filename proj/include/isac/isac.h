/*
 * Copyright 2026 The isac-t2u Authors
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

/* C interface of the isac simulator. Every call returns an isac_status; on
 * failure isac_last_error() describes the error for the calling thread. */

#ifndef ISAC_ISAC_H
#define ISAC_ISAC_H

#include <stddef.h>
#include <stdint.h>

#if defined(ISAC_BUILDING_LIBRARY)
#define ISAC_API __attribute__((visibility("default")))
#else
#define ISAC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isac_status {
  ISAC_OK = 0,
  ISAC_ERR_INVALID_ARGUMENT = 1,
  ISAC_ERR_OUT_OF_DURATION = 2,
  ISAC_ERR_DEGENERATE_GEOMETRY = 3,
  ISAC_ERR_NO_VISIBLE_TARGET = 4,
  ISAC_ERR_RANGE_AMBIGUITY = 5,
  ISAC_ERR_SCHEMA_MISMATCH = 6,
  ISAC_ERR_PARSE = 7,
  ISAC_ERR_DEGENERATE_INTERVAL = 8,
  ISAC_ERR_IO = 9,
  ISAC_ERR_INTERNAL = 10
} isac_status;

typedef enum isac_command {
  ISAC_CMD_SIMULATE = 0,
  ISAC_CMD_DETECT = 1,
  ISAC_CMD_ASSOCIATE = 2,
  ISAC_CMD_EVAL_METRICS = 3,
  ISAC_CMD_SWEEP_SNR = 4,
  ISAC_CMD_SWEEP_CLUTTER = 5,
  ISAC_CMD_SWEEP_MATRIX = 6
} isac_command;

/* Opaque experiment configuration. */
typedef struct isac_experiment isac_experiment;

typedef struct isac_run_options {
  const char* out_dir;          /* NULL: current directory */
  int threads;                  /* < 1 is treated as 1 */
  int dump_images;              /* nonzero: write per-frame image dumps */
  const char* detections_path;  /* NULL or external detections file */
} isac_run_options;

ISAC_API const char* isac_version(void);
/* Short name of a status, e.g. "SchemaMismatch". */
ISAC_API const char* isac_status_string(isac_status status);
/* Message of the last failed call on this thread; "" when none. */
ISAC_API const char* isac_last_error(void);

ISAC_API isac_status isac_experiment_create(isac_experiment** out);
ISAC_API isac_status isac_experiment_from_file(const char* path, isac_experiment** out);
ISAC_API isac_status isac_experiment_from_string(const char* text, isac_experiment** out);
ISAC_API void isac_experiment_destroy(isac_experiment* exp);

/* Same keys as the config file. */
ISAC_API isac_status isac_experiment_set_option(isac_experiment* exp, const char* key,
                                                const char* value);
ISAC_API isac_status isac_experiment_set_seed(isac_experiment* exp, uint64_t seed);
ISAC_API isac_status isac_experiment_get_seed(const isac_experiment* exp, uint64_t* seed);
/* Writes the 16-hex-digit hash and a terminating NUL; len must be >= 17. */
ISAC_API isac_status isac_experiment_spec_hash(const isac_experiment* exp, char* buf, size_t len);
ISAC_API isac_status isac_experiment_validate(const isac_experiment* exp);

ISAC_API isac_status isac_command_from_name(const char* name, isac_command* out);
ISAC_API isac_status isac_run(const isac_experiment* exp, isac_command cmd,
                              const isac_run_options* options);

/* Minimum-cost assignment of a row-major rows x cols matrix. row_to_col
 * receives one entry per row: the assigned column or -1. gate may be NULL. */
ISAC_API isac_status isac_solve_assignment(const double* cost, size_t rows, size_t cols,
                                           const double* gate, int64_t* row_to_col,
                                           double* total_cost);

/* Cross-entropy of the softmax of each logit vector against one-hot beam
 * reports f_h, f_v (0-based). */
ISAC_API isac_status isac_cce_cost(const double* logits_h, size_t n_h, const double* logits_v,
                                   size_t n_v, size_t f_h, size_t f_v, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ISAC_ISAC_H */
