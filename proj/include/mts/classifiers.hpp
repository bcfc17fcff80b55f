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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mts/core.hpp"
#include "mts/features.hpp"

namespace mts::classifiers {

enum class DtwMode { dependent, independent };
enum class DistanceKind { euclidean, dtw };

std::string_view to_string(DtwMode mode);
std::string_view to_string(DistanceKind kind);
DtwMode dtw_mode_from_string(std::string_view text);
DistanceKind distance_kind_from_string(std::string_view text);

struct DtwOptions {
  DtwMode mode = DtwMode::dependent;
  /// Sakoe-Chiba radius; empty means unconstrained. Radii smaller than the
  /// length difference are raised to it.
  std::optional<std::size_t> band_radius;
};

/// Univariate DTW with |a - b| local cost and {down, right, diagonal} steps.
double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> band_radius = std::nullopt);

/// Multivariate DTW over the channels of two samples.
double dtw_distance(const Sample& a, const Sample& b, const DtwOptions& opts = {});

/// Vote fractions over an alphabet; argmax ties go to the earliest symbol.
struct ClassProbabilities {
  std::vector<double> p;
  std::size_t argmax() const;
};

std::size_t argmax_first(std::span<const double> values);

/// Per-channel z-normalization statistics from a training set.
struct ChannelStats {
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> stddev{};
  static ChannelStats fit(const Dataset& train);
  static ChannelStats identity();
  Sample apply(const Sample& s) const;
  bool operator==(const ChannelStats&) const = default;
};

struct KnnOptions {
  std::size_t k = 5;
  DistanceKind distance = DistanceKind::euclidean;
  DtwOptions dtw;
  /// Applies to DTW references only.
  bool znormalize = true;
};

class NeighborModel {
 public:
  /// Feature-space references.
  static NeighborModel fit(const features::FeatureMatrix& train, const LabelAlphabet& alphabet,
                           const KnnOptions& opts);
  /// Raw-series references for DTW.
  static NeighborModel fit(const Dataset& train, const KnnOptions& opts);

  ClassProbabilities predict(const Eigen::VectorXd& query) const;
  ClassProbabilities predict(const Sample& query) const;
  /// Probabilities from one precomputed row of query-to-reference distances.
  ClassProbabilities vote(std::span<const double> distances) const;

  const KnnOptions& options() const { return opts_; }
  const LabelAlphabet& alphabet() const { return alphabet_; }
  std::size_t reference_count() const { return labels_.size(); }
  const std::vector<std::size_t>& reference_labels() const { return labels_; }
  const ChannelStats& channel_stats() const { return stats_; }
  const std::vector<Sample>& reference_samples() const { return samples_; }
  const features::FeatureMatrix& reference_vectors() const { return vectors_; }

  void save(const std::filesystem::path& path) const;
  static NeighborModel load(const std::filesystem::path& path);

  bool operator==(const NeighborModel& o) const;

 private:
  KnnOptions opts_;
  LabelAlphabet alphabet_;
  std::vector<std::size_t> labels_;   // alphabet indices
  features::FeatureMatrix vectors_;   // euclidean mode
  std::vector<Sample> samples_;       // dtw mode, normalized when znormalize
  ChannelStats stats_ = ChannelStats::identity();
};

/// Euclidean distance matrix between rows.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& references);
/// DTW distance matrix between sample sets.
Eigen::MatrixXd distance_matrix(const std::vector<Sample>& queries, const std::vector<Sample>& references,
                                const DtwOptions& opts);

}  // namespace mts::classifiers
