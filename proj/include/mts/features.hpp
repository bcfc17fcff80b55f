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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mts/core.hpp"
#include "mts/io.hpp"

namespace mts::features {

/// One column of the feature matrix: an extractor applied to one channel
/// with fixed parameters. Rendered as `ch<id>__<extractor>[__<key>_<value>]*`.
struct FeatureDescriptor {
  std::string extractor;
  int channel = 0;
  std::vector<std::pair<std::string, std::string>> params;

  std::string render() const;
  static FeatureDescriptor parse(std::string_view text);
  bool operator==(const FeatureDescriptor&) const = default;
};

/// Rows are samples. Column names are descriptor renderings for extracted
/// matrices and `comp<i>` for projected ones.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<std::string> sample_ids;
  std::vector<std::string> labels;
  Eigen::MatrixXd values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

  /// Same columns, subset of rows.
  FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const;

  io::Table to_table() const;
  static FeatureMatrix from_table(const io::Table& t);
};

FeatureMatrix read_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const FeatureMatrix& fm, const std::filesystem::path& path);

/// The per-channel extractor templates, expanded for every channel.
std::vector<FeatureDescriptor> catalog_default();
/// Templates for a single channel (catalog_default() is 13 copies).
std::vector<FeatureDescriptor> catalog_for_channel(int channel);

/// Evaluates one descriptor on one sample. Degenerate inputs (too short,
/// zero variance, out-of-range bins) give 0.
double extract_single(const Sample& sample, const FeatureDescriptor& descriptor);

/// Row i holds sample i's features, columns follow `descriptors`.
FeatureMatrix extract(const Dataset& ds, const std::vector<FeatureDescriptor>& descriptors);
/// Single-sample extraction reusing the compiled descriptor list.
Eigen::VectorXd extract_row(const Sample& sample, const std::vector<FeatureDescriptor>& descriptors);

// Closed-form building blocks, exposed for tests.
double quantile(std::vector<double> x, double q);
double ricker(double t, double width);

}  // namespace mts::features
