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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mts/core.hpp"
#include "mts/features.hpp"

namespace mts::selection {

/// Two-sided Mann-Whitney U p-value of `a` versus `b`. Exact permutation
/// distribution (ties handled through midranks) when both groups have at
/// most 8 members, otherwise the tie-corrected normal approximation with
/// continuity correction.
double mann_whitney_p(std::span<const double> a, std::span<const double> b);

struct PValueTable {
  Eigen::MatrixXd p;                  // features x classes
  std::vector<bool> class_flagged;    // class had < 2 samples (or no rest group)
};

/// One-vs-rest U-test of every feature against every alphabet class.
PValueTable relevance_pvalues(const features::FeatureMatrix& fm, const LabelAlphabet& alphabet);

/// Benjamini-Yekutieli rejections, reported in input order.
std::vector<bool> benjamini_yekutieli(std::span<const double> pvals, double q);

struct SelectionResult {
  std::vector<std::string> all_columns;               // every tested feature, input order
  std::vector<std::vector<bool>> per_class_significant;  // features x classes
  std::vector<std::string> class_symbols;
  std::vector<std::string> selected;                  // subset of all_columns, input order
  int n_significant = 1;
  double fdr_level = 0.05;

  std::size_t significance_count(std::size_t feature) const;
  bool operator==(const SelectionResult&) const = default;
};

SelectionResult select_features(const features::FeatureMatrix& fm, const LabelAlphabet& alphabet,
                                int n_significant, double q);

/// Re-evaluates the selection rule for another threshold without redoing
/// the tests.
SelectionResult with_threshold(const SelectionResult& base, int n_significant);

/// Restricts a matrix to the selected columns, in selection order.
features::FeatureMatrix project(const features::FeatureMatrix& fm, const SelectionResult& sel);

void write_selection(const SelectionResult& sel, const std::filesystem::path& path);
SelectionResult read_selection(const std::filesystem::path& path);

}  // namespace mts::selection
