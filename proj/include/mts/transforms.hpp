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

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mts/features.hpp"

namespace mts::transforms {

/// Per-feature empirical CDF mapped onto uniform [0, 1].
struct QuantileMap {
  int n_quantiles = 1000;
  std::vector<std::string> columns;
  /// landmarks(level, feature), non-decreasing down each column.
  Eigen::MatrixXd landmarks;

  double apply_value(std::size_t feature, double v) const;
  features::FeatureMatrix apply(const features::FeatureMatrix& fm) const;
  bool operator==(const QuantileMap&) const;
};

QuantileMap fit_quantile(const features::FeatureMatrix& train, int n_quantiles);

enum class LinearKind { standardize, pca, lda, nca };
std::string_view to_string(LinearKind kind);
LinearKind linear_kind_from_string(std::string_view text);

/// y = A (x - center). A is n_components x n_features.
struct LinearMap {
  LinearKind kind = LinearKind::standardize;
  std::vector<std::string> input_columns;
  Eigen::VectorXd center;
  Eigen::MatrixXd A;
  /// Eigenvalues for pca / lda (descending), empty otherwise.
  Eigen::VectorXd spectrum;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  features::FeatureMatrix apply(const features::FeatureMatrix& fm) const;
  bool operator==(const LinearMap&) const;
};

LinearMap fit_standardize(const features::FeatureMatrix& train);
LinearMap fit_pca(const features::FeatureMatrix& train, int n_components);

struct LdaFit {
  LinearMap map;
  /// Between-class scatter vanished (all class means equal).
  bool degenerate = false;
};
LdaFit fit_lda(const features::FeatureMatrix& train, int n_components);

struct NcaOptions {
  int max_iter = 200;
  double tolerance = 1e-6;
  double step = 1.0;
};

struct NcaFit {
  LinearMap map;
  std::vector<double> objective_trace;  // value after init and after every accepted step
  int iterations = 0;
};

/// Sum over i of the probability mass that the stochastic neighbor rule
/// assigns to i's own class. `X` rows are samples. When `grad` is non-null
/// it receives d objective / d A.
double nca_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& X,
                     const std::vector<int>& labels, Eigen::MatrixXd* grad = nullptr);

/// Gradient ascent with step halving from `init`. Expects standardized data.
NcaFit fit_nca(const features::FeatureMatrix& train, const LinearMap& init,
               const NcaOptions& opts = {});

using Transform = std::variant<QuantileMap, LinearMap>;

features::FeatureMatrix apply(const Transform& t, const features::FeatureMatrix& fm);
void write_transform(const Transform& t, const std::filesystem::path& path);
Transform read_transform(const std::filesystem::path& path);

/// Integer class ids in first-appearance order; helper shared with tests.
std::vector<int> encode_labels(const std::vector<std::string>& labels);

}  // namespace mts::transforms
