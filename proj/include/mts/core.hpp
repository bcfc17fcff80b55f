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
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mts {

/// Number of sensor channels kept per sample after import.
inline constexpr std::size_t kChannels = 13;

/// Fixed channel ordering. Accelerometer channels come first so that the
/// gravity-removal filter can target them by id range.
enum ChannelId : int {
  kAccFrontX = 0, kAccFrontY, kAccFrontZ,
  kAccRearX, kAccRearY, kAccRearZ,
  kGyroX, kGyroY, kGyroZ,
  kMagX, kMagY, kMagZ,
  kForce,
};

std::string_view channel_name(int channel_id);

enum class ErrorKind { validation, io };

/// Every failure raised by the core. The C API maps `kind` onto its status
/// codes; the CLI maps it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(const std::string& message);
[[noreturn]] void fail_io(const std::string& message);

using Series = std::vector<double>;

struct Sample {
  std::string id;
  std::string label;
  std::optional<std::string> writer;
  /// Exactly kChannels series of equal length for a well-formed sample.
  /// Held as a vector so that malformed input can be represented and
  /// reported by validate_dataset instead of failing at parse time.
  std::vector<Series> channels;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }

  /// Checked constructor: throws on channel count or length mismatch.
  static Sample make(std::string id, std::string label, std::optional<std::string> writer,
                     std::vector<Series> channels);

  bool operator==(const Sample&) const = default;
};

enum class CaseMode { lower, upper, combined, custom };

std::string_view to_string(CaseMode mode);
CaseMode case_mode_from_string(std::string_view text);

class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  /// Builds the canonical 26/52-symbol alphabets. Combined mode orders
  /// upper case before lower case (byte order).
  static LabelAlphabet make(CaseMode mode);
  /// Arbitrary ordered symbol list, used for externally produced
  /// prediction tensors whose class columns are not letters.
  static LabelAlphabet custom(std::vector<std::string> symbols);

  const std::vector<std::string>& symbols() const { return symbols_; }
  CaseMode mode() const { return mode_; }
  std::size_t size() const { return symbols_.size(); }
  std::optional<std::size_t> index_of(std::string_view symbol) const;
  std::size_t require_index(std::string_view symbol) const;
  const std::string& operator[](std::size_t i) const { return symbols_[i]; }

  bool operator==(const LabelAlphabet&) const = default;

 private:
  std::vector<std::string> symbols_;
  CaseMode mode_ = CaseMode::custom;
};

enum class Dependency { WD, WI };
enum class Role { train, test };

struct SplitSpec {
  int fold = 0;
  Dependency dependency = Dependency::WD;
  Role role = Role::train;
  bool operator==(const SplitSpec&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  LabelAlphabet alphabet = LabelAlphabet::make(CaseMode::lower);
  SplitSpec split;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  bool operator==(const Dataset&) const = default;
};

struct SubsetStats {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
};

/// Returns one message per violated invariant; empty when the dataset is
/// well formed.
std::vector<std::string> validate_dataset(const Dataset& ds);

/// Writer-disjointness check for a WI train/test pair.
std::vector<std::string> validate_split_pair(const Dataset& train, const Dataset& test);

/// Mean and population standard deviation of sample lengths.
SubsetStats compute_subset_stats(const Dataset& ds);

/// Guesses the alphabet mode from the labels present (lower, upper or
/// combined).
LabelAlphabet infer_alphabet(const std::vector<Sample>& samples);
LabelAlphabet infer_alphabet(const std::vector<std::string>& labels);

}  // namespace mts
