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

#include "mts/pipeline.hpp"

#include <cmath>
#include <random>
#include <set>

#include "mts/log.hpp"
#include "mts/parallel.hpp"

namespace mts::pipeline {

namespace fs = std::filesystem;

namespace {

std::string bool_text(bool v) { return v ? "true" : "false"; }

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key + ": expected true or false, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  const double d = io::parse_double(v);
  if (d != std::floor(d)) fail(key + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  if (n < 0) fail(key + ": must be non-negative");
  return static_cast<std::size_t>(n);
}

std::string channel_list(const std::set<int>& channels) {
  std::string out;
  for (int c : channels) {
    if (!out.empty()) out += ';';
    out += std::to_string(c);
  }
  return out;
}

std::set<int> parse_channels(const std::string& key, const std::string& v) {
  std::set<int> out;
  for (const auto& part : io::split(v, ';')) {
    const std::string t = io::trim(part);
    if (t.empty()) continue;
    out.insert(static_cast<int>(parse_int(key, t)));
  }
  return out;
}

preprocess::Options resolve_prep(const Dataset& train, const Config& cfg) {
  preprocess::Options prep = cfg.prep;
  if (cfg.preprocess && prep.apply_trim && prep.auto_trim_k > 0.0) {
    prep.trim = preprocess::derive_trim_spec(compute_subset_stats(train), prep.auto_trim_k, prep.trim.min_len);
    prep.auto_trim_k = 0.0;
    log_info("pipeline", "derived max_len " + std::to_string(prep.trim.max_len));
  }
  return prep;
}

Dataset apply_prep(const Dataset& ds, const Config& cfg, const preprocess::Options& prep,
                   std::string_view what) {
  if (!cfg.preprocess) return ds;
  auto r = preprocess::run(ds, prep);
  if (!r.discarded.empty()) {
    log_info("pipeline", std::string(what) + ": trimmed " + std::to_string(r.discarded.size()) + " of " +
                             std::to_string(ds.size()) + " samples");
  }
  if (r.retained.empty()) fail(std::string(what) + ": no samples left after trimming");
  return std::move(r.retained);
}

classifiers::KnnOptions knn_options(const Config& cfg) {
  classifiers::KnnOptions o = cfg.knn;
  o.distance = cfg.kind == ModelKind::dtw ? classifiers::DistanceKind::dtw : classifiers::DistanceKind::euclidean;
  return o;
}

features::FeatureMatrix apply_chain(const std::vector<transforms::Transform>& chain, features::FeatureMatrix fm) {
  for (const auto& t : chain) fm = transforms::apply(t, fm);
  return fm;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::dtw ? "dtw" : "features"; }

std::string_view to_string(Scaling scaling) {
  switch (scaling) {
    case Scaling::none: return "none";
    case Scaling::quantile: return "quantile";
    case Scaling::standardize: return "standardize";
    case Scaling::pca: return "pca";
    case Scaling::nca: return "nca";
  }
  return "none";
}

ModelKind model_kind_from_string(std::string_view text) {
  if (text == "features") return ModelKind::features;
  if (text == "dtw") return ModelKind::dtw;
  fail("unknown model kind '" + std::string(text) + "'");
}

Scaling scaling_from_string(std::string_view text) {
  for (Scaling s : {Scaling::none, Scaling::quantile, Scaling::standardize, Scaling::pca, Scaling::nca}) {
    if (to_string(s) == text) return s;
  }
  fail("unknown scaling '" + std::string(text) + "'");
}

Config Config::defaults(ModelKind kind) {
  Config c;
  c.kind = kind;
  if (kind == ModelKind::dtw) {
    c.name = "knn_dtw";
    c.prep.apply_highpass = false;
    c.prep.window = 1;
    c.knn.distance = classifiers::DistanceKind::dtw;
  }
  return c;
}

io::Config Config::to_config() const {
  io::Config c;
  auto put = [&](const std::string& k, std::string v) { c.set("pipeline." + k, std::move(v)); };
  put("name", name);
  put("kind", std::string(to_string(kind)));
  put("preprocess", bool_text(preprocess));
  put("highpass", bool_text(prep.apply_highpass));
  put("cutoff_hz", io::format_double(prep.filter.cutoff_hz));
  put("sampling_hz", io::format_double(prep.filter.sampling_hz));
  put("filter_order", std::to_string(prep.filter.order));
  put("filter_channels", channel_list(prep.filter.target_channels));
  put("window", std::to_string(prep.window));
  put("trim", bool_text(prep.apply_trim));
  put("min_len", std::to_string(prep.trim.min_len));
  put("max_len", std::to_string(prep.trim.max_len));
  put("auto_trim", io::format_double(prep.auto_trim_k));
  put("n_significant", std::to_string(n_significant));
  put("fdr_q", io::format_double(fdr_q));
  put("scaling", std::string(to_string(scaling)));
  put("n_quantiles", std::to_string(n_quantiles));
  put("n_components", std::to_string(n_components));
  put("nca_max_iter", std::to_string(nca.max_iter));
  put("nca_tolerance", io::format_double(nca.tolerance));
  put("nca_step", io::format_double(nca.step));
  put("nca_init_jitter", io::format_double(nca_init_jitter));
  put("k", std::to_string(knn.k));
  put("dtw_mode", std::string(classifiers::to_string(knn.dtw.mode)));
  put("band_radius", knn.dtw.band_radius ? std::to_string(*knn.dtw.band_radius) : "none");
  put("znormalize", bool_text(knn.znormalize));
  put("seed", std::to_string(seed));
  return c;
}

Config Config::from_config(const io::Config& cfg, Config c) {
  for (const auto& [key, v] : cfg.with_prefix("pipeline.")) {
    const std::string full = "pipeline." + key;
    if (key == "name") c.name = v;
    else if (key == "kind") c.kind = model_kind_from_string(v);
    else if (key == "preprocess") c.preprocess = parse_bool(full, v);
    else if (key == "highpass") c.prep.apply_highpass = parse_bool(full, v);
    else if (key == "cutoff_hz") c.prep.filter.cutoff_hz = io::parse_double(v);
    else if (key == "sampling_hz") c.prep.filter.sampling_hz = io::parse_double(v);
    else if (key == "filter_order") c.prep.filter.order = static_cast<int>(parse_int(full, v));
    else if (key == "filter_channels") c.prep.filter.target_channels = parse_channels(full, v);
    else if (key == "window") c.prep.window = static_cast<int>(parse_int(full, v));
    else if (key == "trim") c.prep.apply_trim = parse_bool(full, v);
    else if (key == "min_len") c.prep.trim.min_len = parse_count(full, v);
    else if (key == "max_len") c.prep.trim.max_len = parse_count(full, v);
    else if (key == "auto_trim") c.prep.auto_trim_k = io::parse_double(v);
    else if (key == "n_significant") c.n_significant = static_cast<int>(parse_int(full, v));
    else if (key == "fdr_q") c.fdr_q = io::parse_double(v);
    else if (key == "scaling") c.scaling = scaling_from_string(v);
    else if (key == "n_quantiles") c.n_quantiles = static_cast<int>(parse_int(full, v));
    else if (key == "n_components") c.n_components = static_cast<int>(parse_int(full, v));
    else if (key == "nca_max_iter") c.nca.max_iter = static_cast<int>(parse_int(full, v));
    else if (key == "nca_tolerance") c.nca.tolerance = io::parse_double(v);
    else if (key == "nca_step") c.nca.step = io::parse_double(v);
    else if (key == "nca_init_jitter") c.nca_init_jitter = io::parse_double(v);
    else if (key == "k") c.knn.k = parse_count(full, v);
    else if (key == "dtw_mode") c.knn.dtw.mode = classifiers::dtw_mode_from_string(v);
    else if (key == "band_radius") {
      if (v == "none" || v.empty()) c.knn.dtw.band_radius.reset();
      else c.knn.dtw.band_radius = parse_count(full, v);
    } else if (key == "znormalize") c.knn.znormalize = parse_bool(full, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_count(full, v));
    else fail("unknown configuration key '" + full + "'");
  }
  c.knn.distance = c.kind == ModelKind::dtw ? classifiers::DistanceKind::dtw : classifiers::DistanceKind::euclidean;
  return c;
}

std::array<double, kChannels> channel_means(const Dataset& ds) {
  std::array<double, kChannels> out{};
  double count = 0.0;
  for (const auto& s : ds.samples) count += static_cast<double>(s.length());
  if (count == 0.0) fail("cannot compute channel means of an empty dataset");
  for (std::size_t c = 0; c < kChannels; ++c) {
    double sum = 0.0;
    for (const auto& s : ds.samples) {
      for (double v : s.channels[c]) sum += v;
    }
    out[c] = sum / count;
  }
  return out;
}

FoldCache prepare_fold(const Dataset& train, const Dataset& test, const Config& cfg) {
  FoldCache fold;
  fold.prep = resolve_prep(train, cfg);
  fold.train = apply_prep(train, cfg, fold.prep, "train");
  fold.test = apply_prep(test, cfg, fold.prep, "test");
  if (cfg.kind == ModelKind::features) {
    fold.train_features = features::extract(fold.train, features::catalog_default());
    fold.base_selection =
        selection::select_features(*fold.train_features, fold.train.alphabet, cfg.n_significant, cfg.fdr_q);
  }
  return fold;
}

std::vector<transforms::Transform> fit_chain(features::FeatureMatrix& train, const Config& cfg) {
  std::vector<transforms::Transform> chain;
  auto push = [&](transforms::Transform t) {
    train = transforms::apply(t, train);
    chain.push_back(std::move(t));
  };
  switch (cfg.scaling) {
    case Scaling::none:
      break;
    case Scaling::quantile:
      push(transforms::fit_quantile(train, cfg.n_quantiles));
      break;
    case Scaling::standardize:
      push(transforms::fit_standardize(train));
      break;
    case Scaling::pca:
      push(transforms::fit_standardize(train));
      push(transforms::fit_pca(train, cfg.n_components));
      break;
    case Scaling::nca: {
      push(transforms::fit_standardize(train));
      auto lda = transforms::fit_lda(train, cfg.n_components);
      if (lda.degenerate) log_warn("pipeline", "LDA start has no between-class scatter");
      if (cfg.nca_init_jitter > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> noise(0.0, cfg.nca_init_jitter);
        for (Eigen::Index i = 0; i < lda.map.A.size(); ++i) lda.map.A.data()[i] += noise(rng);
      }
      auto nca = transforms::fit_nca(train, lda.map, cfg.nca);
      log_info("pipeline", "NCA stopped after " + std::to_string(nca.iterations) + " iterations");
      push(std::move(nca.map));
      break;
    }
  }
  return chain;
}

Model Model::fit(const Dataset& train, const Config& cfg) {
  FoldCache fold;
  fold.prep = resolve_prep(train, cfg);
  fold.train = apply_prep(train, cfg, fold.prep, "train");
  return fit_prepared(fold, cfg);
}

Model Model::fit_prepared(const FoldCache& fold, const Config& cfg) {
  Model m;
  m.cfg_ = cfg;
  m.cfg_.prep = fold.prep;
  m.channel_means_ = pipeline::channel_means(fold.train);
  const auto opts = knn_options(cfg);
  if (cfg.kind == ModelKind::dtw) {
    m.knn_ = classifiers::NeighborModel::fit(fold.train, opts);
    return m;
  }
  const features::FeatureMatrix full =
      fold.train_features ? *fold.train_features : features::extract(fold.train, features::catalog_default());
  if (fold.base_selection && fold.base_selection->fdr_level == cfg.fdr_q) {
    m.selection_ = selection::with_threshold(*fold.base_selection, cfg.n_significant);
  } else {
    m.selection_ = selection::select_features(full, fold.train.alphabet, cfg.n_significant, cfg.fdr_q);
  }
  if (m.selection_->selected.empty()) {
    fail("no features selected at n_significant=" + std::to_string(cfg.n_significant));
  }
  for (const auto& col : m.selection_->selected) m.descriptors_.push_back(features::FeatureDescriptor::parse(col));
  features::FeatureMatrix x = selection::project(full, *m.selection_);
  m.chain_ = fit_chain(x, cfg);
  m.knn_ = classifiers::NeighborModel::fit(x, fold.train.alphabet, opts);
  return m;
}

Sample Model::prepare(const Sample& raw) const {
  if (!cfg_.preprocess) return raw;
  Sample s = raw;
  if (cfg_.prep.apply_highpass) s = preprocess::highpass(s, cfg_.prep.filter);
  if (cfg_.prep.window > 1) s = preprocess::moving_average(s, cfg_.prep.window);
  return s;
}

classifiers::ClassProbabilities Model::predict_prepared(const Sample& sample) const {
  if (cfg_.kind == ModelKind::dtw) return knn_.predict(sample);
  features::FeatureMatrix fm;
  for (const auto& d : descriptors_) fm.columns.push_back(d.render());
  fm.sample_ids = {sample.id};
  fm.labels = {sample.label};
  fm.values = features::extract_row(sample, descriptors_).transpose();
  fm = apply_chain(chain_, std::move(fm));
  return knn_.predict(Eigen::VectorXd(fm.values.row(0).transpose()));
}

ensemble::PredictionMatrix Model::predict_prepared(const Dataset& prepared) const {
  ensemble::PredictionMatrix pm;
  pm.model_ids = {cfg_.name};
  pm.alphabet = alphabet();
  for (const auto& s : prepared.samples) pm.sample_ids.push_back(s.id);
  pm.tensor.assign(1, std::vector<std::vector<double>>(prepared.size()));
  auto& rows = pm.tensor[0];
  if (cfg_.kind == ModelKind::dtw) {
    parallel_for(prepared.size(), [&](std::size_t i) { rows[i] = knn_.predict(prepared.samples[i]).p; });
    return pm;
  }
  features::FeatureMatrix fm = apply_chain(chain_, features::extract(prepared, descriptors_));
  parallel_for(prepared.size(), [&](std::size_t i) {
    rows[i] = knn_.predict(Eigen::VectorXd(fm.values.row(static_cast<Eigen::Index>(i)).transpose())).p;
  });
  return pm;
}

ensemble::PredictionMatrix Model::predict(const Dataset& test) const {
  return predict_prepared(apply_prep(test, cfg_, cfg_.prep, "test"));
}

void Model::save(const fs::path& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_io(dir.string() + ": " + ec.message());
  const io::Config snapshot = cfg_.to_config();
  std::string text;
  for (const auto& [k, v] : snapshot.entries()) text += k + " = " + v + "\n";
  io::write_file(dir / "pipeline.cfg", text);

  io::Table means;
  means.key_names = {"channel"};
  means.value_names = {"mean"};
  for (std::size_t c = 0; c < kChannels; ++c) means.add_row({std::to_string(c)}, {channel_means_[c]});
  io::write_table(means, dir / "channel_means.csv");

  if (selection_) selection::write_selection(*selection_, dir / "selection.csv");
  for (std::size_t i = 0; i < chain_.size(); ++i) {
    transforms::write_transform(chain_[i], dir / ("transform_" + std::to_string(i) + ".csv"));
  }
  knn_.save(dir / "knn.jsonl");
}

Model Model::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail_io(dir.string() + ": model directory not found");
  Model m;
  m.cfg_ = Config::from_config(io::Config::load(dir / "pipeline.cfg"), Config{});
  const io::Table means = io::read_table(dir / "channel_means.csv", 1);
  if (means.rows() != kChannels || means.value_names.size() != 1) {
    fail((dir / "channel_means.csv").string() + ": expected 13 channel rows");
  }
  for (std::size_t c = 0; c < kChannels; ++c) m.channel_means_[c] = means.values[c][0];
  if (m.cfg_.kind == ModelKind::features) {
    m.selection_ = selection::read_selection(dir / "selection.csv");
    for (const auto& col : m.selection_->selected) {
      m.descriptors_.push_back(features::FeatureDescriptor::parse(col));
    }
    for (std::size_t i = 0;; ++i) {
      const fs::path p = dir / ("transform_" + std::to_string(i) + ".csv");
      if (!fs::exists(p)) break;
      m.chain_.push_back(transforms::read_transform(p));
    }
  }
  m.knn_ = classifiers::NeighborModel::load(dir / "knn.jsonl");
  return m;
}

RunResult evaluate(const FoldCache& fold, const Config& cfg) {
  const Model model = Model::fit_prepared(fold, cfg);
  RunResult r;
  r.predictions = model.predict_prepared(fold.test);
  r.n_features = model.descriptors().size();
  std::size_t correct = 0;
  for (std::size_t s = 0; s < fold.test.size(); ++s) {
    r.truth.push_back(model.alphabet().require_index(fold.test.samples[s].label));
    r.predicted.push_back(r.predictions.argmax(0, s));
    if (r.truth.back() == r.predicted.back()) ++correct;
  }
  r.accuracy = fold.test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(fold.test.size());
  return r;
}

RunResult run(const Dataset& train, const Dataset& test, const Config& cfg) {
  return evaluate(prepare_fold(train, test, cfg), cfg);
}

}  // namespace mts::pipeline
