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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mts/ensemble.hpp"
#include "mts/io.hpp"
#include "mts/pipeline.hpp"

namespace mts::analysis {

/// Fraction of positions where the two label sequences agree.
double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

/// counts[truth][predicted].
using Confusion = std::vector<std::vector<std::size_t>>;

Confusion confusion_matrix(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                           std::size_t n_classes);

struct FoldReport {
  std::vector<double> fold_accuracy;
  double mean = 0.0;
  Confusion confusion;
};

FoldReport make_report(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                       std::size_t n_classes);
/// Mean of the fold accuracies; confusion matrices summed.
FoldReport fold_average(const std::vector<FoldReport>& folds);

/// Alphabet index of every sample of `pm`, looked up by sample id.
std::vector<std::size_t> align_truth(const ensemble::PredictionMatrix& pm,
                                     const std::map<std::string, std::string>& labels_by_id);

struct PredictionSpace {
  std::vector<std::string> model_ids;
  std::vector<std::string> sample_ids;
  std::vector<std::vector<bool>> correct;  // models x samples
};

PredictionSpace prediction_space(const ensemble::PredictionMatrix& pm, std::span<const std::size_t> truth,
                                 std::size_t target_class);

struct RescueReport {
  std::string anchor;
  std::size_t anchor_failures = 0;
  std::vector<std::string> model_ids;  // every model except the anchor
  std::vector<std::size_t> rescued;    // per model: anchor failures it gets right
  std::size_t rescued_by_any = 0;      // union over the other models
};

RescueReport failure_rescue(const ensemble::PredictionMatrix& pm, std::span<const std::size_t> truth,
                            const std::string& anchor);

io::Table to_table(const PredictionSpace& ps);
io::Table to_table(const RescueReport& r);
io::Table to_table(const FoldReport& r, const LabelAlphabet& alphabet);

/// Binary P5 grayscale image; values are clamped to [0, 1] and scaled to 255.
void write_pgm(const Eigen::MatrixXd& intensity, const std::filesystem::path& path);
/// Correct cells white, incorrect black.
Eigen::MatrixXd to_intensity(const PredictionSpace& ps);

enum class SweepParam { n_significant, n_components, k, band_radius };
std::string_view to_string(SweepParam p);
SweepParam sweep_param_from_string(std::string_view text);

/// `a:b` (inclusive, step 1), `a:b:s`, or a comma-separated list.
std::vector<double> parse_grid(std::string_view text);

struct SweepRow {
  double value = 0.0;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
  std::size_t n_features = 0;  // selected features, averaged over folds and rounded down
};

struct Fold {
  Dataset train;
  Dataset test;
};

/// Runs the configured pipeline for every grid value on every fold. Grid
/// point i runs with seed base.seed + i.
std::vector<SweepRow> sweep(SweepParam param, const std::vector<double>& grid, const std::vector<Fold>& folds,
                            const pipeline::Config& base);

io::Table to_table(SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace mts::analysis
