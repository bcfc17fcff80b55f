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

#include "mts/mts.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <map>
#include <new>
#include <optional>
#include <string>
#include <variant>

#include "mts/analysis.hpp"
#include "mts/classifiers.hpp"
#include "mts/core.hpp"
#include "mts/ensemble.hpp"
#include "mts/explain.hpp"
#include "mts/features.hpp"
#include "mts/io.hpp"
#include "mts/log.hpp"
#include "mts/parallel.hpp"
#include "mts/pipeline.hpp"
#include "mts/preprocess.hpp"
#include "mts/selection.hpp"
#include "mts/transforms.hpp"

namespace fs = std::filesystem;
using namespace mts;

struct mts_config {
  io::Config cfg;
};
struct mts_dataset {
  Dataset ds;
};
struct mts_features {
  features::FeatureMatrix fm;
};
struct mts_selection {
  selection::SelectionResult sel;
};
struct mts_transform {
  std::vector<transforms::Transform> chain;
};
struct mts_model {
  std::variant<classifiers::NeighborModel, pipeline::Model> m;
};
struct mts_predictions {
  ensemble::PredictionMatrix pm;
};
struct mts_weights {
  ensemble::TierWeights w;
};
struct mts_explanation {
  explain::Report report;
};

namespace {

thread_local std::string t_last_error;

struct NullArgument {};

mts_status set_error(mts_status code, const char* what) {
  t_last_error = what;
  return code;
}

template <typename F>
mts_status guard(F&& body) {
  try {
    t_last_error.clear();
    body();
    return MTS_OK;
  } catch (const NullArgument&) {
    return set_error(MTS_ERR_ARGUMENT, "null argument");
  } catch (const Error& e) {
    return set_error(e.kind() == ErrorKind::io ? MTS_ERR_IO : MTS_ERR_VALIDATION, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(MTS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(MTS_ERR_INTERNAL, e.what());
  }
}

template <typename... P>
void require(const P*... ptrs) {
  if (((ptrs == nullptr) || ...)) throw NullArgument{};
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::optional<CaseMode> case_mode(int mode) {
  switch (mode) {
    case MTS_CASE_INFER: return std::nullopt;
    case MTS_CASE_LOWER: return CaseMode::lower;
    case MTS_CASE_UPPER: return CaseMode::upper;
    case MTS_CASE_COMBINED: return CaseMode::combined;
    default: fail("unknown case mode " + std::to_string(mode));
  }
}

LabelAlphabet alphabet_for(const std::vector<std::string>& labels, int mode) {
  const auto m = case_mode(mode);
  return m ? LabelAlphabet::make(*m) : infer_alphabet(labels);
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

classifiers::KnnOptions knn_options(const mts_knn_options* o) {
  classifiers::KnnOptions k;
  if (!o) return k;
  k.k = o->k;
  k.dtw.mode = o->dtw_independent ? classifiers::DtwMode::independent : classifiers::DtwMode::dependent;
  if (o->band_radius >= 0) k.dtw.band_radius = static_cast<std::size_t>(o->band_radius);
  k.znormalize = o->znormalize != 0;
  return k;
}

pipeline::Config pipeline_config(const char* kind, const mts_config* cfg) {
  auto base = pipeline::Config::defaults(
      kind ? pipeline::model_kind_from_string(kind) : pipeline::ModelKind::features);
  if (cfg) {
    // The kind argument wins over a pipeline.kind key; defaults follow it.
    if (auto k = cfg->cfg.get("pipeline.kind"); k && !kind) {
      base = pipeline::Config::defaults(pipeline::model_kind_from_string(*k));
    }
    base = pipeline::Config::from_config(cfg->cfg, base);
    if (kind) {
      base.kind = pipeline::model_kind_from_string(kind);
      base.knn.distance = base.kind == pipeline::ModelKind::dtw ? classifiers::DistanceKind::dtw
                                                                : classifiers::DistanceKind::euclidean;
    }
  }
  return base;
}

std::map<std::string, std::string> labels_by_id(const Dataset& ds) {
  std::map<std::string, std::string> out;
  for (const auto& s : ds.samples) out[s.id] = s.label;
  return out;
}

void ensure_dir(const char* dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_io(std::string(dir) + ": " + ec.message());
}

}  // namespace

extern "C" {

const char* mts_last_error(void) { return t_last_error.c_str(); }
const char* mts_version(void) { return "0.1.0"; }
void mts_string_free(char* s) { std::free(s); }

void mts_set_threads(size_t n) { set_thread_count(n); }
size_t mts_threads(void) { return thread_count(); }

void mts_set_log_callback(mts_log_fn fn, void* user) {
  if (!fn) {
    set_log_sink({});
    return;
  }
  set_log_sink([fn, user](LogLevel level, std::string_view component, std::string_view message) {
    const std::string c(component);
    const std::string m(message);
    fn(static_cast<int>(level), c.c_str(), m.c_str(), user);
  });
}

void mts_set_log_level(int level) {
  set_log_level(static_cast<LogLevel>(std::clamp(level, 0, 3)));
}

mts_status mts_file_digest(const char* path, char** out) {
  return guard([&] {
    require(path, out);
    *out = dup(io::file_digest(path));
  });
}

// ---- config ----------------------------------------------------------------

mts_config* mts_config_new(void) { return new (std::nothrow) mts_config{}; }

mts_status mts_config_load(const char* path, mts_config** out) {
  return guard([&] {
    require(path, out);
    *out = new mts_config{io::Config::load(path)};
  });
}

mts_status mts_config_set(mts_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg, key, value);
    cfg->cfg.set(key, value);
  });
}

int mts_config_get(const mts_config* cfg, const char* key, char** value) {
  if (!cfg || !key || !value) return 0;
  const auto v = cfg->cfg.get(key);
  if (!v) return 0;
  *value = dup(*v);
  return 1;
}

mts_status mts_config_render(const mts_config* cfg, char** out) {
  return guard([&] {
    require(cfg, out);
    std::string text;
    for (const auto& [k, v] : cfg->cfg.entries()) text += k + " = " + v + "\n";
    *out = dup(text);
  });
}

void mts_config_free(mts_config* cfg) { delete cfg; }

// ---- datasets --------------------------------------------------------------

mts_status mts_dataset_read(const char* path, int mode, mts_dataset** out) {
  return guard([&] {
    require(path, out);
    *out = new mts_dataset{io::read_dataset(path, SplitSpec{}, case_mode(mode))};
  });
}

mts_status mts_dataset_import(const mts_config* cfg, const char* csv_path, mts_dataset** out) {
  return guard([&] {
    require(cfg, csv_path, out);
    *out = new mts_dataset{io::import_raw(io::ImportConfig::from_config(cfg->cfg), csv_path)};
  });
}

mts_status mts_dataset_write(const mts_dataset* ds, const char* path) {
  return guard([&] {
    require(ds, path);
    io::write_dataset(ds->ds, path);
  });
}

size_t mts_dataset_size(const mts_dataset* ds) { return ds ? ds->ds.size() : 0; }

mts_status mts_dataset_sample(const mts_dataset* ds, size_t index, const char** id, const char** label,
                              size_t* length) {
  return guard([&] {
    require(ds);
    if (index >= ds->ds.size()) fail("sample index out of range");
    const auto& s = ds->ds.samples[index];
    if (id) *id = s.id.c_str();
    if (label) *label = s.label.c_str();
    if (length) *length = s.length();
  });
}

mts_status mts_dataset_stats(const mts_dataset* ds, double* mu, double* sigma, size_t* n) {
  return guard([&] {
    require(ds);
    const auto st = compute_subset_stats(ds->ds);
    if (mu) *mu = st.mu;
    if (sigma) *sigma = st.sigma;
    if (n) *n = st.n;
  });
}

mts_status mts_dataset_validate(const mts_dataset* ds, char** report) {
  return guard([&] {
    require(ds, report);
    *report = dup(join_lines(validate_dataset(ds->ds)));
  });
}

mts_status mts_dataset_check_split(const mts_dataset* train, const mts_dataset* test, char** report) {
  return guard([&] {
    require(train, test, report);
    *report = dup(join_lines(validate_split_pair(train->ds, test->ds)));
  });
}

void mts_dataset_free(mts_dataset* ds) { delete ds; }

void mts_preprocess_options_default(mts_preprocess_options* o) {
  if (!o) return;
  const preprocess::Options d;
  o->apply_highpass = d.apply_highpass ? 1 : 0;
  o->cutoff_hz = d.filter.cutoff_hz;
  o->sampling_hz = d.filter.sampling_hz;
  o->order = d.filter.order;
  o->window = d.window;
  o->apply_trim = d.apply_trim ? 1 : 0;
  o->min_len = d.trim.min_len;
  o->max_len = d.trim.max_len;
  o->auto_trim_k = d.auto_trim_k;
}

mts_status mts_dataset_preprocess(const mts_dataset* ds, const mts_preprocess_options* o, mts_dataset** out,
                                  char** discarded_csv) {
  return guard([&] {
    require(ds, o, out);
    preprocess::Options opts;
    opts.apply_highpass = o->apply_highpass != 0;
    opts.filter.cutoff_hz = o->cutoff_hz;
    opts.filter.sampling_hz = o->sampling_hz;
    opts.filter.order = o->order;
    opts.window = o->window;
    opts.apply_trim = o->apply_trim != 0;
    opts.trim.min_len = o->min_len;
    opts.trim.max_len = o->max_len;
    opts.auto_trim_k = o->auto_trim_k;
    if (opts.apply_trim) opts.trim.validate();
    auto r = preprocess::run(ds->ds, opts);
    if (discarded_csv) {
      io::Table t;
      t.key_names = {"sample_id"};
      t.value_names = {"length"};
      t.tail_names = {"reason"};
      for (const auto& d : r.discarded) t.add_row({d.id}, {static_cast<double>(d.length)}, {d.reason});
      *discarded_csv = dup(io::render_table(t));
    }
    *out = new mts_dataset{std::move(r.retained)};
  });
}

// ---- features --------------------------------------------------------------

mts_status mts_catalog(char** out) {
  return guard([&] {
    require(out);
    std::string text;
    for (const auto& d : features::catalog_default()) text += d.render() + "\n";
    *out = dup(text);
  });
}

mts_status mts_features_extract(const mts_dataset* ds, mts_features** out) {
  return guard([&] {
    require(ds, out);
    *out = new mts_features{features::extract(ds->ds, features::catalog_default())};
  });
}

mts_status mts_features_read(const char* path, mts_features** out) {
  return guard([&] {
    require(path, out);
    *out = new mts_features{features::read_feature_matrix(path)};
  });
}

mts_status mts_features_write(const mts_features* fm, const char* path) {
  return guard([&] {
    require(fm, path);
    features::write_feature_matrix(fm->fm, path);
  });
}

size_t mts_features_rows(const mts_features* fm) { return fm ? fm->fm.rows() : 0; }
size_t mts_features_cols(const mts_features* fm) { return fm ? fm->fm.cols() : 0; }

mts_status mts_features_value(const mts_features* fm, size_t row, size_t col, double* out) {
  return guard([&] {
    require(fm, out);
    if (row >= fm->fm.rows() || col >= fm->fm.cols()) fail("feature index out of range");
    *out = fm->fm.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
}

const char* mts_features_column(const mts_features* fm, size_t col) {
  if (!fm || col >= fm->fm.columns.size()) return nullptr;
  return fm->fm.columns[col].c_str();
}

void mts_features_free(mts_features* fm) { delete fm; }

// ---- selection -------------------------------------------------------------

mts_status mts_select(const mts_features* train, int mode, int n_significant, double fdr_q, mts_selection** out) {
  return guard([&] {
    require(train, out);
    const auto alphabet = alphabet_for(train->fm.labels, mode);
    *out = new mts_selection{selection::select_features(train->fm, alphabet, n_significant, fdr_q)};
  });
}

mts_status mts_selection_read(const char* path, mts_selection** out) {
  return guard([&] {
    require(path, out);
    *out = new mts_selection{selection::read_selection(path)};
  });
}

mts_status mts_selection_write(const mts_selection* sel, const char* path) {
  return guard([&] {
    require(sel, path);
    selection::write_selection(sel->sel, path);
  });
}

size_t mts_selection_count(const mts_selection* sel) { return sel ? sel->sel.selected.size() : 0; }

const char* mts_selection_name(const mts_selection* sel, size_t index) {
  if (!sel || index >= sel->sel.selected.size()) return nullptr;
  return sel->sel.selected[index].c_str();
}

mts_status mts_selection_project(const mts_selection* sel, const mts_features* fm, mts_features** out) {
  return guard([&] {
    require(sel, fm, out);
    *out = new mts_features{selection::project(fm->fm, sel->sel)};
  });
}

void mts_selection_free(mts_selection* sel) { delete sel; }

// ---- transforms ------------------------------------------------------------

mts_status mts_transform_fit(const mts_features* train, const char* kind, const mts_config* cfg, uint64_t seed,
                             mts_transform** out) {
  return guard([&] {
    require(train, kind, out);
    pipeline::Config pc = pipeline_config(nullptr, cfg);
    pc.seed = seed;
    features::FeatureMatrix x = train->fm;
    std::vector<transforms::Transform> chain;
    if (std::string_view(kind) == "lda") {
      chain.push_back(transforms::fit_standardize(x));
      x = transforms::apply(chain.back(), x);
      auto lda = transforms::fit_lda(x, pc.n_components);
      if (lda.degenerate) log_warn("transform", "no between-class scatter");
      chain.push_back(std::move(lda.map));
    } else {
      pc.scaling = pipeline::scaling_from_string(kind);
      chain = pipeline::fit_chain(x, pc);
    }
    *out = new mts_transform{std::move(chain)};
  });
}

mts_status mts_transform_apply(const mts_transform* t, const mts_features* in, mts_features** out) {
  return guard([&] {
    require(t, in, out);
    features::FeatureMatrix fm = in->fm;
    for (const auto& stage : t->chain) fm = transforms::apply(stage, fm);
    *out = new mts_features{std::move(fm)};
  });
}

mts_status mts_transform_save(const mts_transform* t, const char* dir) {
  return guard([&] {
    require(t, dir);
    ensure_dir(dir);
    for (std::size_t i = 0; i < t->chain.size(); ++i) {
      transforms::write_transform(t->chain[i], fs::path(dir) / ("transform_" + std::to_string(i) + ".csv"));
    }
  });
}

mts_status mts_transform_load(const char* dir, mts_transform** out) {
  return guard([&] {
    require(dir, out);
    if (!fs::is_directory(dir)) fail_io(std::string(dir) + ": transform directory not found");
    mts_transform t;
    for (std::size_t i = 0;; ++i) {
      const fs::path p = fs::path(dir) / ("transform_" + std::to_string(i) + ".csv");
      if (!fs::exists(p)) break;
      t.chain.push_back(transforms::read_transform(p));
    }
    *out = new mts_transform{std::move(t)};
  });
}

size_t mts_transform_stages(const mts_transform* t) { return t ? t->chain.size() : 0; }
void mts_transform_free(mts_transform* t) { delete t; }

// ---- models ----------------------------------------------------------------

void mts_knn_options_default(mts_knn_options* o) {
  if (!o) return;
  const classifiers::KnnOptions d;
  o->k = d.k;
  o->dtw_independent = 0;
  o->band_radius = -1;
  o->znormalize = d.znormalize ? 1 : 0;
}

mts_status mts_model_fit_features(const mts_features* train, int mode, const mts_knn_options* opts,
                                  mts_model** out) {
  return guard([&] {
    require(train, out);
    const auto alphabet = alphabet_for(train->fm.labels, mode);
    *out = new mts_model{classifiers::NeighborModel::fit(train->fm, alphabet, knn_options(opts))};
  });
}

mts_status mts_model_fit_dtw(const mts_dataset* train, const mts_knn_options* opts, mts_model** out) {
  return guard([&] {
    require(train, out);
    *out = new mts_model{classifiers::NeighborModel::fit(train->ds, knn_options(opts))};
  });
}

mts_status mts_model_fit_pipeline(const mts_dataset* train, const char* kind, const mts_config* cfg,
                                  mts_model** out) {
  return guard([&] {
    require(train, out);
    *out = new mts_model{pipeline::Model::fit(train->ds, pipeline_config(kind, cfg))};
  });
}

mts_status mts_model_save(const mts_model* m, const char* path) {
  return guard([&] {
    require(m, path);
    if (const auto* knn = std::get_if<classifiers::NeighborModel>(&m->m)) {
      knn->save(path);
    } else {
      std::get<pipeline::Model>(m->m).save(path);
    }
  });
}

mts_status mts_model_load(const char* path, mts_model** out) {
  return guard([&] {
    require(path, out);
    if (fs::is_directory(path)) {
      *out = new mts_model{pipeline::Model::load(path)};
    } else {
      *out = new mts_model{classifiers::NeighborModel::load(path)};
    }
  });
}

mts_status mts_model_predict_features(const mts_model* m, const mts_features* fm, const char* model_id,
                                      mts_predictions** out) {
  return guard([&] {
    require(m, fm, out);
    const auto* knn = std::get_if<classifiers::NeighborModel>(&m->m);
    if (!knn) fail("pipeline models predict from a dataset");
    ensemble::PredictionMatrix pm;
    pm.model_ids = {model_id ? model_id : "knn"};
    pm.sample_ids = fm->fm.sample_ids;
    pm.alphabet = knn->alphabet();
    pm.tensor.assign(1, std::vector<std::vector<double>>(fm->fm.rows()));
    if (knn->options().distance != classifiers::DistanceKind::euclidean) fail("DTW models predict from a dataset");
    if (fm->fm.columns != knn->reference_vectors().columns) fail("feature columns do not match the model");
    parallel_for(fm->fm.rows(), [&](std::size_t i) {
      pm.tensor[0][i] = knn->predict(Eigen::VectorXd(fm->fm.values.row(static_cast<Eigen::Index>(i)).transpose())).p;
    });
    *out = new mts_predictions{std::move(pm)};
  });
}

mts_status mts_model_predict_dataset(const mts_model* m, const mts_dataset* ds, const char* model_id,
                                     mts_predictions** out) {
  return guard([&] {
    require(m, ds, out);
    ensemble::PredictionMatrix pm;
    if (const auto* knn = std::get_if<classifiers::NeighborModel>(&m->m)) {
      if (knn->options().distance != classifiers::DistanceKind::dtw) fail("feature models predict from features");
      pm.model_ids = {model_id ? model_id : "knn_dtw"};
      pm.alphabet = knn->alphabet();
      for (const auto& s : ds->ds.samples) pm.sample_ids.push_back(s.id);
      pm.tensor.assign(1, std::vector<std::vector<double>>(ds->ds.size()));
      parallel_for(ds->ds.size(), [&](std::size_t i) { pm.tensor[0][i] = knn->predict(ds->ds.samples[i]).p; });
    } else {
      pm = std::get<pipeline::Model>(m->m).predict(ds->ds);
      if (model_id) pm.model_ids = {model_id};
    }
    *out = new mts_predictions{std::move(pm)};
  });
}

void mts_model_free(mts_model* m) { delete m; }

// ---- predictions -----------------------------------------------------------

mts_status mts_predictions_read(const char* path, int mode, mts_predictions** out) {
  return guard([&] {
    require(path, out);
    *out = new mts_predictions{ensemble::load_prediction_matrix(path, case_mode(mode))};
  });
}

mts_status mts_predictions_write(const mts_predictions* pm, const char* path, int with_argmax) {
  return guard([&] {
    require(pm, path);
    ensemble::save_prediction_matrix(pm->pm, path, with_argmax != 0);
  });
}

mts_status mts_predictions_merge(const mts_predictions* a, const mts_predictions* b, mts_predictions** out) {
  return guard([&] {
    require(a, b, out);
    if (!(a->pm.alphabet == b->pm.alphabet)) fail("prediction tensors use different alphabets");
    if (a->pm.sample_ids != b->pm.sample_ids) fail("prediction tensors cover different samples");
    ensemble::PredictionMatrix pm = a->pm;
    for (std::size_t m = 0; m < b->pm.models(); ++m) {
      for (const auto& id : pm.model_ids) {
        if (id == b->pm.model_ids[m]) fail("duplicate model id '" + id + "'");
      }
      pm.model_ids.push_back(b->pm.model_ids[m]);
      pm.tensor.push_back(b->pm.tensor[m]);
    }
    *out = new mts_predictions{std::move(pm)};
  });
}

size_t mts_predictions_models(const mts_predictions* pm) { return pm ? pm->pm.models() : 0; }
size_t mts_predictions_samples(const mts_predictions* pm) { return pm ? pm->pm.samples() : 0; }
size_t mts_predictions_classes(const mts_predictions* pm) { return pm ? pm->pm.alphabet.size() : 0; }

mts_status mts_predictions_value(const mts_predictions* pm, size_t model, size_t sample, size_t cls, double* out) {
  return guard([&] {
    require(pm, out);
    if (model >= pm->pm.models() || sample >= pm->pm.samples() || cls >= pm->pm.alphabet.size()) {
      fail("prediction index out of range");
    }
    *out = pm->pm.tensor[model][sample][cls];
  });
}

mts_status mts_predictions_argmax(const mts_predictions* pm, size_t model, size_t sample, size_t* out) {
  return guard([&] {
    require(pm, out);
    if (model >= pm->pm.models() || sample >= pm->pm.samples()) fail("prediction index out of range");
    *out = pm->pm.argmax(model, sample);
  });
}

void mts_predictions_free(mts_predictions* pm) { delete pm; }

mts_weights* mts_weights_default(void) { return new (std::nothrow) mts_weights{ensemble::default_tier_weights()}; }

mts_status mts_weights_read(const char* path, mts_weights** out) {
  return guard([&] {
    require(path, out);
    *out = new mts_weights{ensemble::load_weights(path)};
  });
}

mts_status mts_weights_write(const mts_weights* w, const char* path) {
  return guard([&] {
    require(w, path);
    ensemble::save_weights(w->w, path);
  });
}

void mts_weights_free(mts_weights* w) { delete w; }

mts_status mts_ensemble(const mts_predictions* pm, const char* scheme, const mts_weights* weights,
                        const char* models, const char* out_model_id, mts_predictions** out) {
  return guard([&] {
    require(pm, scheme, out);
    const auto s = ensemble::scheme_from_string(scheme);
    const auto w = weights ? weights->w : ensemble::default_tier_weights();
    const auto ids = ensemble::resolve_models(pm->pm, models ? models : "all", w);
    const auto result = ensemble::vote(pm->pm, s, w, ids);
    *out = new mts_predictions{
        ensemble::as_prediction_matrix(pm->pm, result, out_model_id ? out_model_id : std::string(scheme))};
  });
}

// ---- analysis --------------------------------------------------------------

mts_status mts_accuracy(const mts_predictions* pm, size_t model, const mts_dataset* truth, double* out) {
  return guard([&] {
    require(pm, truth, out);
    if (model >= pm->pm.models()) fail("model index out of range");
    const auto t = analysis::align_truth(pm->pm, labels_by_id(truth->ds));
    std::vector<std::size_t> pred;
    for (std::size_t s = 0; s < pm->pm.samples(); ++s) pred.push_back(pm->pm.argmax(model, s));
    *out = analysis::accuracy(pred, t);
  });
}

mts_status mts_analyze_accuracy(const mts_predictions* pm, const mts_dataset* truth, const char* out_dir) {
  return guard([&] {
    require(pm, truth, out_dir);
    ensure_dir(out_dir);
    const auto t = analysis::align_truth(pm->pm, labels_by_id(truth->ds));
    io::Table summary;
    summary.key_names = {"model_id"};
    summary.value_names = {"accuracy", "n"};
    for (std::size_t m = 0; m < pm->pm.models(); ++m) {
      std::vector<std::size_t> pred;
      for (std::size_t s = 0; s < pm->pm.samples(); ++s) pred.push_back(pm->pm.argmax(m, s));
      const auto report = analysis::make_report(pred, t, pm->pm.alphabet.size());
      summary.add_row({pm->pm.model_ids[m]}, {report.mean, static_cast<double>(t.size())});
      io::write_table(analysis::to_table(report, pm->pm.alphabet),
                      fs::path(out_dir) / ("confusion_" + pm->pm.model_ids[m] + ".csv"));
    }
    io::write_table(summary, fs::path(out_dir) / "accuracy.csv");
  });
}

mts_status mts_analyze_prediction_space(const mts_predictions* pm, const mts_dataset* truth,
                                        const char* class_symbol, const char* out_dir) {
  return guard([&] {
    require(pm, truth, class_symbol, out_dir);
    ensure_dir(out_dir);
    const auto t = analysis::align_truth(pm->pm, labels_by_id(truth->ds));
    const auto ps = analysis::prediction_space(pm->pm, t, pm->pm.alphabet.require_index(class_symbol));
    io::write_table(analysis::to_table(ps), fs::path(out_dir) / "prediction_space.csv");
    analysis::write_pgm(analysis::to_intensity(ps), fs::path(out_dir) / "prediction_space.pgm");
  });
}

mts_status mts_analyze_failure(const mts_predictions* pm, const mts_dataset* truth, const char* anchor,
                               const char* out_dir) {
  return guard([&] {
    require(pm, truth, anchor, out_dir);
    ensure_dir(out_dir);
    const auto t = analysis::align_truth(pm->pm, labels_by_id(truth->ds));
    const auto r = analysis::failure_rescue(pm->pm, t, anchor);
    io::write_table(analysis::to_table(r), fs::path(out_dir) / "failure_rescue.csv");
  });
}

mts_status mts_sweep(const char* param, const char* grid, const char* const* train_paths,
                     const char* const* test_paths, size_t n_folds, const char* kind, const mts_config* cfg,
                     const char* out_dir) {
  return guard([&] {
    require(param, grid, out_dir);
    if (n_folds == 0 || !train_paths || !test_paths) fail("sweep needs at least one fold");
    const auto p = analysis::sweep_param_from_string(param);
    const auto values = analysis::parse_grid(grid);
    const auto base = pipeline_config(kind, cfg);
    std::vector<analysis::Fold> folds;
    for (std::size_t f = 0; f < n_folds; ++f) {
      require(train_paths[f], test_paths[f]);
      folds.push_back({io::read_dataset(train_paths[f], SplitSpec{static_cast<int>(f)}),
                       io::read_dataset(test_paths[f], SplitSpec{static_cast<int>(f)})});
    }
    ensure_dir(out_dir);
    io::write_table(analysis::to_table(p, analysis::sweep(p, values, folds, base)),
                    fs::path(out_dir) / "sweep.csv");
  });
}

// ---- explanations ----------------------------------------------------------

void mts_explain_options_default(mts_explain_options* o) {
  if (!o) return;
  const explain::Options d;
  o->n_slices = d.n_slices;
  o->n_perturbations = d.n_perturbations;
  o->top_k = d.top_k;
  o->seed = d.seed;
  o->replacement = "mean";
}

mts_status mts_explain(const mts_model* m, const mts_dataset* ds, const char* sample_id,
                       const mts_explain_options* o, mts_explanation** out) {
  return guard([&] {
    require(m, ds, sample_id, out);
    const auto* model = std::get_if<pipeline::Model>(&m->m);
    if (!model) fail("explanations need a pipeline model");
    const Sample* raw = nullptr;
    for (const auto& s : ds->ds.samples) {
      if (s.id == sample_id) raw = &s;
    }
    if (!raw) fail("sample '" + std::string(sample_id) + "' not found");
    explain::Options opts;
    if (o) {
      opts.n_slices = o->n_slices;
      opts.n_perturbations = o->n_perturbations;
      opts.top_k = o->top_k;
      opts.seed = o->seed;
      if (o->replacement) opts.replacement = explain::replacement_from_string(o->replacement);
    }
    const Sample prepared = model->prepare(*raw);
    auto report = explain::explain(
        prepared, [model](const Sample& s) { return model->predict_prepared(s).p; }, model->channel_means(),
        model->alphabet(), opts);
    report.model_id = model->config().name;
    *out = new mts_explanation{std::move(report)};
  });
}

size_t mts_explanation_size(const mts_explanation* e) { return e ? e->report.entries.size() : 0; }

mts_status mts_explanation_entry(const mts_explanation* e, size_t index, int* channel, size_t* slice,
                                 double* weight) {
  return guard([&] {
    require(e);
    if (index >= e->report.entries.size()) fail("entry index out of range");
    const auto& en = e->report.entries[index];
    if (channel) *channel = en.channel;
    if (slice) *slice = en.slice;
    if (weight) *weight = en.weight;
  });
}

const char* mts_explanation_label(const mts_explanation* e) { return e ? e->report.predicted_label.c_str() : nullptr; }

mts_status mts_explanation_write(const mts_explanation* e, const char* out_dir) {
  return guard([&] {
    require(e, out_dir);
    ensure_dir(out_dir);
    const fs::path dir(out_dir);
    io::write_table(explain::to_table(e->report), dir / "explanation.csv");
    const auto o = explain::render_overlay(e->report, e->report.n_slices);
    io::write_table(explain::to_table(o.weights), dir / "overlay.csv");
    io::write_table(explain::to_table(o.positive), dir / "overlay_positive.csv");
    io::write_table(explain::to_table(o.negative), dir / "overlay_negative.csv");
    const double scale = std::max(o.positive.maxCoeff(), o.negative.maxCoeff());
    const double inv = scale > 0.0 ? 1.0 / scale : 0.0;
    analysis::write_pgm(o.positive * inv, dir / "overlay_positive.pgm");
    analysis::write_pgm(o.negative * inv, dir / "overlay_negative.pgm");
  });
}

void mts_explanation_free(mts_explanation* e) { delete e; }

}  // extern "C"
