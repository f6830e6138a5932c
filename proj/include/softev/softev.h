// Copyright 2026 The softev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to softev.
 *
 * Every fallible call returns a softev_status; on failure a description of the
 * error is available from softev_last_error() on the calling thread until the
 * next failing call on that thread. Objects are opaque handles released with
 * their matching *_free function. Strings returned through char** are
 * allocated by the library and released with softev_string_free.
 *
 * Matrices are passed row-major. Joint tables have one row per outcome of
 * alpha and one column per event gamma_i.
 */

#ifndef SOFTEV_SOFTEV_H
#define SOFTEV_SOFTEV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SOFTEV_BUILDING_LIBRARY)
#    define SOFTEV_API __declspec(dllexport)
#  else
#    define SOFTEV_API __declspec(dllimport)
#  endif
#else
#  define SOFTEV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum softev_status {
  SOFTEV_OK = 0,
  SOFTEV_ERR_USAGE = 1,
  SOFTEV_ERR_DATA = 2,
  SOFTEV_ERR_IO = 3,
  SOFTEV_ERR_DEGENERATE_EVIDENCE = 4,
  SOFTEV_ERR_SHAPE = 5,
  SOFTEV_ERR_BOUNDS = 6,
  SOFTEV_ERR_DOMAIN = 7,
  SOFTEV_ERR_NUMERIC = 8,
  SOFTEV_ERR_TRAINING_DIVERGED = 9,
  SOFTEV_ERR_INTERNAL = 10
} softev_status;

typedef struct softev_dataset softev_dataset;
typedef struct softev_model softev_model;

SOFTEV_API const char* softev_version(void);
SOFTEV_API const char* softev_last_error(void);
SOFTEV_API const char* softev_status_name(softev_status status);
/* Process exit code for a status: 0 success, 3 training divergence, 2 otherwise. */
SOFTEV_API int softev_exit_code(softev_status status);
SOFTEV_API void softev_string_free(char* s);

/* Jeffrey conditionalization. Output arrays hold `alpha` entries. */
SOFTEV_API softev_status softev_hard_condition(const double* joint, size_t alpha, size_t events, size_t event,
                                               double* out);
SOFTEV_API softev_status softev_jeffrey_update(const double* joint, size_t alpha, size_t events,
                                               const double* constraint, double* out);
SOFTEV_API softev_status softev_kl_oracle(const double* joint, size_t alpha, size_t events, const double* constraint,
                                          size_t resolution, double* out);
/* Writes +infinity when q has mass where p has none. */
SOFTEV_API softev_status softev_kl_divergence(const double* q, const double* p, size_t n, double* out);

/* Datasets in the soft-label CSV schema. */
SOFTEV_API softev_status softev_dataset_load_csv(const char* path, softev_dataset** out);
SOFTEV_API softev_status softev_dataset_save_csv(const softev_dataset* ds, const char* path);
SOFTEV_API softev_status softev_dataset_from_annotations(const char* path, size_t classes, softev_dataset** out);
SOFTEV_API softev_status softev_dataset_synth_blobs(size_t classes, size_t dims, size_t per_class, double separation,
                                                   uint64_t seed, softev_dataset** out);
SOFTEV_API softev_status softev_dataset_corrupt(const softev_dataset* ds, size_t annotators, double error_rate,
                                                uint64_t seed, softev_dataset** out);
SOFTEV_API size_t softev_dataset_rows(const softev_dataset* ds);
SOFTEV_API size_t softev_dataset_dims(const softev_dataset* ds);
SOFTEV_API size_t softev_dataset_classes(const softev_dataset* ds);
/* Copies the {rows, classes} soft-label matrix; capacity counts doubles. */
SOFTEV_API softev_status softev_dataset_soft_labels(const softev_dataset* ds, double* out, size_t capacity);
SOFTEV_API softev_status softev_dataset_mean_top_vote_share(const softev_dataset* ds, double* out);
SOFTEV_API void softev_dataset_free(softev_dataset* ds);

/* Experiments driven by a JSON run configuration (keys documented in README). */
SOFTEV_API softev_status softev_generate_data(const char* config_json, const char* train_path,
                                             const char* test_path);
/* Trains the first configured method; model may be NULL if not wanted. */
SOFTEV_API softev_status softev_train(const char* config_json, softev_model** model, char** results_json);
SOFTEV_API softev_status softev_bench(const char* config_json, char** results_json);

SOFTEV_API softev_status softev_model_load(const char* path, softev_model** out);
SOFTEV_API softev_status softev_model_save(const softev_model* model, const char* path);
SOFTEV_API size_t softev_model_members(const softev_model* model);
SOFTEV_API size_t softev_model_classes(const softev_model* model);
/* x is {rows, dims}; out receives {rows, classes} predictive probabilities. */
SOFTEV_API softev_status softev_model_predict(const softev_model* model, const double* x, size_t rows, size_t dims,
                                              size_t samples, uint64_t seed, double* out);
/* Weight statistics CSV of member `member`. */
SOFTEV_API softev_status softev_model_weight_stats_csv(const softev_model* model, size_t member, char** out_csv);
SOFTEV_API void softev_model_free(softev_model* model);

#ifdef __cplusplus
}
#endif

#endif /* SOFTEV_SOFTEV_H */
