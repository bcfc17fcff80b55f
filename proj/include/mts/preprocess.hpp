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
#include <set>
#include <string>
#include <vector>

#include "mts/core.hpp"

namespace mts::preprocess {

struct FilterSpec {
  double cutoff_hz = 1.0;
  double sampling_hz = 100.0;
  int order = 2;
  /// Accelerometer channels only; gravity lives there.
  std::set<int> target_channels = {0, 1, 2, 3, 4, 5};

  void validate() const;
};

struct TrimSpec {
  std::size_t max_len = 104;
  std::size_t min_len = 10;

  void validate() const;
};

/// One biquad in transposed direct form II, normalized so that a0 == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

/// Digital Butterworth high-pass as cascaded second-order sections
/// (bilinear transform with frequency pre-warping). Odd orders end with a
/// first-order section stored as a biquad with b[2] == a[2] == 0.
std::vector<Biquad> butterworth_highpass(const FilterSpec& spec);

/// Zero-phase filtering: forward pass then reversed pass over a mirror
/// extension long enough for the start-up transient to decay, with
/// steady-state initial conditions per section.
Series filtfilt(const std::vector<Biquad>& sections, const Series& x);

/// High-pass filters the target channels. Samples shorter than 3 * order
/// pass through unchanged with a warning.
Sample highpass(const Sample& sample, const FilterSpec& spec);

/// Centered moving mean with a window that shrinks at the sequence edges.
Series moving_average(const Series& x, int window);
Sample moving_average(const Sample& sample, int window);

struct Discard {
  std::string id;
  std::size_t length = 0;
  std::string reason;
};

struct TrimResult {
  Dataset retained;
  std::vector<Discard> discarded;
};

/// Keeps samples with min_len <= length <= max_len, order preserved.
TrimResult trim_outliers(const Dataset& ds, const TrimSpec& spec);

/// max_len = round(mu + k_sigma * sigma).
TrimSpec derive_trim_spec(const SubsetStats& stats, double k_sigma, std::size_t min_len);

struct Options {
  bool apply_highpass = true;
  FilterSpec filter;
  int window = 11;  // <= 1 disables smoothing
  bool apply_trim = true;
  TrimSpec trim;
  /// When > 0, max_len is derived from the dataset's own stats.
  double auto_trim_k = 0.0;
};

/// Trim first, then filter what is left.
TrimResult run(const Dataset& ds, const Options& opts);

}  // namespace mts::preprocess
