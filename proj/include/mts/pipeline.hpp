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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mts/classifiers.hpp"
#include "mts/core.hpp"
#include "mts/ensemble.hpp"
#include "mts/features.hpp"
#include "mts/io.hpp"
#include "mts/preprocess.hpp"
#include "mts/selection.hpp"
#include "mts/transforms.hpp"

namespace mts::pipeline {

enum class ModelKind { features, dtw };
enum class Scaling { none, quantile, standardize, pca, nca };

std::string_view to_string(ModelKind kind);
std::string_view to_string(Scaling scaling);
ModelKind model_kind_from_string(std::string_view text);
Scaling scaling_from_string(std::string_view text);

struct Config {
  std::string name = "knn";
  ModelKind kind = ModelKind::features;
  bool preprocess = true;
  preprocess::Options prep;

  int n_significant = 17;
  double fdr_q = 0.05;
  Scaling scaling = Scaling::quantile;
  int n_quantiles = 1000;
  int n_components = 20;
  transforms::NcaOptions nca;
  /// Standard deviation of seeded Gaussian noise added to the LDA start.
  double nca_init_jitter = 0.0;

  classifiers::KnnOptions knn;
  std::uint64_t seed = 0;

  /// Feature models: filter + smooth + trim. DTW models: trim only.
  static Config defaults(ModelKind kind);

  /// Flat `pipeline.*` keys; round-trips through from_config.
  io::Config to_config() const;
  /// Overrides the fields of `base` that `cfg` sets under `pipeline.`.
  static Config from_config(const io::Config& cfg, Config base);
};

/// Preprocessed data plus cached full-catalog features, shared by every
/// grid point of a sweep over one fold.
struct FoldCache {
  /// Preprocessing with any automatic trim threshold resolved on train.
  preprocess::Options prep;
  Dataset train;
  Dataset test;
  std::optional<features::FeatureMatrix> train_features;
  std::optional<selection::SelectionResult> base_selection;  // tests done, threshold free
};

FoldCache prepare_fold(const Dataset& train, const Dataset& test, const Config& cfg);

class Model {
 public:
  /// Preprocesses `train` and fits every stage.
  static Model fit(const Dataset& train, const Config& cfg);
  /// Fits from an already prepared fold.
  static Model fit_prepared(const FoldCache& fold, const Config& cfg);

  /// Filters and smooths one sample as configured (no trimming).
  Sample prepare(const Sample& raw) const;
  /// Probabilities for an already prepared sample.
  classifiers::ClassProbabilities predict_prepared(const Sample& sample) const;
  /// Preprocesses (including trimming) and predicts a whole dataset.
  ensemble::PredictionMatrix predict(const Dataset& test) const;
  ensemble::PredictionMatrix predict_prepared(const Dataset& prepared) const;

  const Config& config() const { return cfg_; }
  const LabelAlphabet& alphabet() const { return knn_.alphabet(); }
  const std::array<double, kChannels>& channel_means() const { return channel_means_; }
  const std::vector<features::FeatureDescriptor>& descriptors() const { return descriptors_; }
  const std::vector<transforms::Transform>& chain() const { return chain_; }
  const classifiers::NeighborModel& knn() const { return knn_; }

  /// Directory layout: pipeline.cfg, channel_means.csv, selection.csv,
  /// transform_<i>.csv, knn.jsonl.
  void save(const std::filesystem::path& dir) const;
  static Model load(const std::filesystem::path& dir);

 private:
  Config cfg_;
  std::array<double, kChannels> channel_means_{};
  std::optional<selection::SelectionResult> selection_;
  std::vector<features::FeatureDescriptor> descriptors_;
  std::vector<transforms::Transform> chain_;
  classifiers::NeighborModel knn_;
};

/// Per-channel mean over every timestep of a dataset.
std::array<double, kChannels> channel_means(const Dataset& ds);

/// Fits the transform chain on `train` for the configured scaling and
/// returns the chain; `train` is replaced by its transformed version.
std::vector<transforms::Transform> fit_chain(features::FeatureMatrix& train, const Config& cfg);

struct RunResult {
  double accuracy = 0.0;
  std::vector<std::size_t> predicted;
  std::vector<std::size_t> truth;
  std::size_t n_features = 0;  // selected features (feature models)
  ensemble::PredictionMatrix predictions;
};

RunResult evaluate(const FoldCache& fold, const Config& cfg);
RunResult run(const Dataset& train, const Dataset& test, const Config& cfg);

}  // namespace mts::pipeline
