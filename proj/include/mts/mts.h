// Copyright 2026 The mts Authors
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

#ifndef MTS_MTS_H_
#define MTS_MTS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef MTS_BUILDING_LIBRARY
#    define MTS_API __declspec(dllexport)
#  else
#    define MTS_API __declspec(dllimport)
#  endif
#else
#  define MTS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mts_status {
  MTS_OK = 0,
  MTS_ERR_VALIDATION = 1,
  MTS_ERR_IO = 2,
  MTS_ERR_ARGUMENT = 3, /* null handle or pointer */
  MTS_ERR_INTERNAL = 4
} mts_status;

/* Case modes; MTS_CASE_INFER lets the library decide from the labels. */
enum { MTS_CASE_INFER = -1, MTS_CASE_LOWER = 0, MTS_CASE_UPPER = 1, MTS_CASE_COMBINED = 2 };

typedef struct mts_config mts_config;
typedef struct mts_dataset mts_dataset;
typedef struct mts_features mts_features;
typedef struct mts_selection mts_selection;
typedef struct mts_transform mts_transform;
typedef struct mts_model mts_model;
typedef struct mts_predictions mts_predictions;
typedef struct mts_weights mts_weights;
typedef struct mts_explanation mts_explanation;

/* Message of the last failed call on this thread; "" when none. */
MTS_API const char* mts_last_error(void);
MTS_API const char* mts_version(void);
/* Strings returned through char** out-parameters. */
MTS_API void mts_string_free(char* s);

MTS_API void mts_set_threads(size_t n);
MTS_API size_t mts_threads(void);

/* level: 0 debug, 1 info, 2 warn, 3 error. A null callback restores the
 * default stderr sink. */
typedef void (*mts_log_fn)(int level, const char* component, const char* message, void* user);
MTS_API void mts_set_log_callback(mts_log_fn fn, void* user);
MTS_API void mts_set_log_level(int level);

/* 64-bit FNV-1a of a file, 16 lowercase hex digits. */
MTS_API mts_status mts_file_digest(const char* path, char** out);

/* ---- flat key = value configuration ---------------------------------- */

MTS_API mts_config* mts_config_new(void);
MTS_API mts_status mts_config_load(const char* path, mts_config** out);
MTS_API mts_status mts_config_set(mts_config* cfg, const char* key, const char* value);
/* Returns 1 and a copy of the value when the key exists, 0 otherwise. */
MTS_API int mts_config_get(const mts_config* cfg, const char* key, char** value);
/* Whole configuration rendered as text. */
MTS_API mts_status mts_config_render(const mts_config* cfg, char** out);
MTS_API void mts_config_free(mts_config* cfg);

/* ---- datasets ---------------------------------------------------------- */

MTS_API mts_status mts_dataset_read(const char* path, int case_mode, mts_dataset** out);
/* Long-format CSV import driven by the import.* keys of cfg. */
MTS_API mts_status mts_dataset_import(const mts_config* cfg, const char* csv_path, mts_dataset** out);
MTS_API mts_status mts_dataset_write(const mts_dataset* ds, const char* path);
MTS_API size_t mts_dataset_size(const mts_dataset* ds);
MTS_API mts_status mts_dataset_sample(const mts_dataset* ds, size_t index, const char** id, const char** label,
                                      size_t* length);
MTS_API mts_status mts_dataset_stats(const mts_dataset* ds, double* mu, double* sigma, size_t* n);
/* Newline-separated violation messages; empty string when valid. */
MTS_API mts_status mts_dataset_validate(const mts_dataset* ds, char** report);
MTS_API mts_status mts_dataset_check_split(const mts_dataset* train, const mts_dataset* test, char** report);
MTS_API void mts_dataset_free(mts_dataset* ds);

typedef struct mts_preprocess_options {
  int apply_highpass;
  double cutoff_hz;
  double sampling_hz;
  int order;
  int window;
  int apply_trim;
  size_t min_len;
  size_t max_len;
  double auto_trim_k; /* > 0 derives max_len from the data */
} mts_preprocess_options;

MTS_API void mts_preprocess_options_default(mts_preprocess_options* opts);
/* discarded_csv (optional) receives sample_id,length,reason rows. */
MTS_API mts_status mts_dataset_preprocess(const mts_dataset* ds, const mts_preprocess_options* opts,
                                          mts_dataset** out, char** discarded_csv);

/* ---- features ---------------------------------------------------------- */

/* Newline-separated descriptor list of the default catalog. */
MTS_API mts_status mts_catalog(char** out);
MTS_API mts_status mts_features_extract(const mts_dataset* ds, mts_features** out);
MTS_API mts_status mts_features_read(const char* path, mts_features** out);
MTS_API mts_status mts_features_write(const mts_features* fm, const char* path);
MTS_API size_t mts_features_rows(const mts_features* fm);
MTS_API size_t mts_features_cols(const mts_features* fm);
MTS_API mts_status mts_features_value(const mts_features* fm, size_t row, size_t col, double* out);
MTS_API const char* mts_features_column(const mts_features* fm, size_t col);
MTS_API void mts_features_free(mts_features* fm);

/* ---- selection ---------------------------------------------------------- */

MTS_API mts_status mts_select(const mts_features* train, int case_mode, int n_significant, double fdr_q,
                              mts_selection** out);
MTS_API mts_status mts_selection_read(const char* path, mts_selection** out);
MTS_API mts_status mts_selection_write(const mts_selection* sel, const char* path);
MTS_API size_t mts_selection_count(const mts_selection* sel);
MTS_API const char* mts_selection_name(const mts_selection* sel, size_t index);
MTS_API mts_status mts_selection_project(const mts_selection* sel, const mts_features* fm, mts_features** out);
MTS_API void mts_selection_free(mts_selection* sel);

/* ---- transforms --------------------------------------------------------- */

/* kind: "quantile", "standardize", "pca", "lda" or "nca". pca, lda and nca
 * standardize first; nca starts from lda. A transform is a chain of
 * fitted stages saved as transform_<i>.csv files in a directory. */
MTS_API mts_status mts_transform_fit(const mts_features* train, const char* kind, const mts_config* cfg,
                                     uint64_t seed, mts_transform** out);
MTS_API mts_status mts_transform_apply(const mts_transform* t, const mts_features* in, mts_features** out);
MTS_API mts_status mts_transform_save(const mts_transform* t, const char* dir);
MTS_API mts_status mts_transform_load(const char* dir, mts_transform** out);
MTS_API size_t mts_transform_stages(const mts_transform* t);
MTS_API void mts_transform_free(mts_transform* t);

/* ---- models ------------------------------------------------------------ */

typedef struct mts_knn_options {
  size_t k;
  int dtw_independent; /* 0 dependent, 1 independent */
  long band_radius;    /* < 0 unconstrained */
  int znormalize;
} mts_knn_options;

MTS_API void mts_knn_options_default(mts_knn_options* opts);
/* Euclidean kNN over feature rows. */
MTS_API mts_status mts_model_fit_features(const mts_features* train, int case_mode, const mts_knn_options* opts,
                                          mts_model** out);
/* DTW kNN over raw series. */
MTS_API mts_status mts_model_fit_dtw(const mts_dataset* train, const mts_knn_options* opts, mts_model** out);
/* End-to-end pipeline driven by the pipeline.* keys of cfg (may be null). */
MTS_API mts_status mts_model_fit_pipeline(const mts_dataset* train, const char* kind, const mts_config* cfg,
                                          mts_model** out);
/* kNN models are a single file; pipelines are a directory. */
MTS_API mts_status mts_model_save(const mts_model* m, const char* path);
MTS_API mts_status mts_model_load(const char* path, mts_model** out);
MTS_API mts_status mts_model_predict_features(const mts_model* m, const mts_features* fm, const char* model_id,
                                              mts_predictions** out);
MTS_API mts_status mts_model_predict_dataset(const mts_model* m, const mts_dataset* ds, const char* model_id,
                                             mts_predictions** out);
MTS_API void mts_model_free(mts_model* m);

/* ---- prediction tensors and ensembles ------------------------------------ */

MTS_API mts_status mts_predictions_read(const char* path, int case_mode, mts_predictions** out);
MTS_API mts_status mts_predictions_write(const mts_predictions* pm, const char* path, int with_argmax);
/* Concatenates the models of b after those of a. */
MTS_API mts_status mts_predictions_merge(const mts_predictions* a, const mts_predictions* b, mts_predictions** out);
MTS_API size_t mts_predictions_models(const mts_predictions* pm);
MTS_API size_t mts_predictions_samples(const mts_predictions* pm);
MTS_API size_t mts_predictions_classes(const mts_predictions* pm);
MTS_API mts_status mts_predictions_value(const mts_predictions* pm, size_t model, size_t sample, size_t cls,
                                         double* out);
MTS_API mts_status mts_predictions_argmax(const mts_predictions* pm, size_t model, size_t sample, size_t* out);
MTS_API void mts_predictions_free(mts_predictions* pm);

MTS_API mts_weights* mts_weights_default(void);
MTS_API mts_status mts_weights_read(const char* path, mts_weights** out);
MTS_API mts_status mts_weights_write(const mts_weights* w, const char* path);
MTS_API void mts_weights_free(mts_weights* w);

/* scheme: plurality, weighted, soft or weighted-soft. models: top3, top4,
 * all or a comma-separated id list. weights may be null for the tiers. */
MTS_API mts_status mts_ensemble(const mts_predictions* pm, const char* scheme, const mts_weights* weights,
                                const char* models, const char* out_model_id, mts_predictions** out);

/* ---- analysis ------------------------------------------------------------ */

/* Accuracy of one model against the labels of a dataset (matched by id). */
MTS_API mts_status mts_accuracy(const mts_predictions* pm, size_t model, const mts_dataset* truth, double* out);
/* Per-model accuracy and summed confusion matrix, written as CSV. */
MTS_API mts_status mts_analyze_accuracy(const mts_predictions* pm, const mts_dataset* truth, const char* out_dir);
/* Writes prediction_space.csv and prediction_space.pgm. */
MTS_API mts_status mts_analyze_prediction_space(const mts_predictions* pm, const mts_dataset* truth,
                                                const char* class_symbol, const char* out_dir);
/* Writes failure_rescue.csv. */
MTS_API mts_status mts_analyze_failure(const mts_predictions* pm, const mts_dataset* truth, const char* anchor,
                                       const char* out_dir);
/* Runs the configured pipeline per grid value over folds (train_paths[i],
 * test_paths[i]) and writes sweep.csv. */
MTS_API mts_status mts_sweep(const char* param, const char* grid, const char* const* train_paths,
                             const char* const* test_paths, size_t n_folds, const char* kind,
                             const mts_config* cfg, const char* out_dir);

/* ---- explanations -------------------------------------------------------- */

typedef struct mts_explain_options {
  size_t n_slices;
  size_t n_perturbations;
  size_t top_k;
  uint64_t seed;
  const char* replacement; /* mean, zero or noise */
} mts_explain_options;

MTS_API void mts_explain_options_default(mts_explain_options* opts);
/* model must be a pipeline model; the sample is looked up by id. */
MTS_API mts_status mts_explain(const mts_model* m, const mts_dataset* ds, const char* sample_id,
                               const mts_explain_options* opts, mts_explanation** out);
MTS_API size_t mts_explanation_size(const mts_explanation* e);
MTS_API mts_status mts_explanation_entry(const mts_explanation* e, size_t index, int* channel, size_t* slice,
                                         double* weight);
MTS_API const char* mts_explanation_label(const mts_explanation* e);
/* Writes explanation.csv plus overlay, positive and negative maps as CSV
 * and PGM. */
MTS_API mts_status mts_explanation_write(const mts_explanation* e, const char* out_dir);
MTS_API void mts_explanation_free(mts_explanation* e);

#ifdef __cplusplus
}
#endif

#endif  // MTS_MTS_H_
