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
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mts/core.hpp"
#include "mts/io.hpp"

namespace mts::explain {

/// Contiguous partition of [0, length) into n_slices pieces; the first
/// (length mod n_slices) pieces are one element longer.
struct SliceGrid {
  std::size_t length = 0;
  std::vector<std::size_t> bounds;  // n_slices + 1 offsets

  std::size_t slices() const { return bounds.empty() ? 0 : bounds.size() - 1; }
  std::size_t begin(std::size_t i) const { return bounds[i]; }
  std::size_t end(std::size_t i) const { return bounds[i + 1]; }
};

SliceGrid make_slice_grid(std::size_t length, std::size_t n_slices);

enum class Replacement { mean, zero, noise };
std::string_view to_string(Replacement r);
Replacement replacement_from_string(std::string_view text);

struct Options {
  std::size_t n_slices = 20;
  std::size_t n_perturbations = 1000;
  std::size_t top_k = 30;
  std::uint64_t seed = 0;
  double kernel_width = 0.25;
  double ridge = 1e-3;
  Replacement replacement = Replacement::mean;
  /// Standard deviation of the noise replacement, per channel.
  double noise_sd = 1.0;
};

struct Entry {
  int channel = 0;
  std::size_t slice = 0;
  double weight = 0.0;
};

struct Report {
  std::string model_id;
  std::string sample_id;
  std::size_t predicted_class = 0;
  std::string predicted_label;
  double base_probability = 0.0;
  double intercept = 0.0;
  std::size_t n_slices = 0;
  Options options;
  std::vector<Entry> entries;  // sorted by |weight| descending, at most top_k
};

/// Class probabilities for one (possibly perturbed) sample. Must be safe to
/// call concurrently.
using Predictor = std::function<std::vector<double>(const Sample&)>;

Report explain(const Sample& sample, const Predictor& model, const std::array<double, kChannels>& channel_means,
               const LabelAlphabet& alphabet, const Options& opts);

struct Overlay {
  Eigen::MatrixXd weights;   // channels x slices, signed
  Eigen::MatrixXd positive;  // magnitudes of positive weights
  Eigen::MatrixXd negative;  // magnitudes of negative weights
};

Overlay render_overlay(const Report& report, std::size_t n_slices);

io::Table to_table(const Report& report);
/// Single matrix table with rows ch0..ch12 and columns slice0...
io::Table to_table(const Eigen::MatrixXd& overlay);

}  // namespace mts::explain
