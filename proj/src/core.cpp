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

#include "mts/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace mts {

namespace {

constexpr std::array<std::string_view, kChannels> kChannelNames = {
    "acc_front_x", "acc_front_y", "acc_front_z", "acc_rear_x", "acc_rear_y",
    "acc_rear_z",  "gyro_x",      "gyro_y",      "gyro_z",     "mag_x",
    "mag_y",       "mag_z",       "force"};

}  // namespace

std::string_view channel_name(int channel_id) {
  if (channel_id < 0 || channel_id >= static_cast<int>(kChannels)) return "invalid";
  return kChannelNames[static_cast<std::size_t>(channel_id)];
}

void fail(const std::string& message) { throw Error(ErrorKind::validation, message); }
void fail_io(const std::string& message) { throw Error(ErrorKind::io, message); }

Sample Sample::make(std::string id, std::string label, std::optional<std::string> writer,
                    std::vector<Series> channels) {
  if (channels.size() != kChannels) {
    fail("sample " + id + ": expected " + std::to_string(kChannels) + " channels");
  }
  const std::size_t n = channels.front().size();
  if (n == 0) fail("sample " + id + ": empty channel");
  for (std::size_t c = 1; c < channels.size(); ++c) {
    if (channels[c].size() != n) {
      fail("sample " + id + ": channel " + std::to_string(c) + " has length " +
           std::to_string(channels[c].size()) + ", expected " + std::to_string(n));
    }
  }
  if (writer && writer->empty()) writer.reset();
  return Sample{std::move(id), std::move(label), std::move(writer), std::move(channels)};
}

std::string_view to_string(CaseMode mode) {
  switch (mode) {
    case CaseMode::lower: return "lower";
    case CaseMode::upper: return "upper";
    case CaseMode::combined: return "combined";
    case CaseMode::custom: return "custom";
  }
  return "custom";
}

CaseMode case_mode_from_string(std::string_view text) {
  if (text == "lower") return CaseMode::lower;
  if (text == "upper") return CaseMode::upper;
  if (text == "combined") return CaseMode::combined;
  if (text == "custom") return CaseMode::custom;
  fail("unknown case mode '" + std::string(text) + "'");
}

LabelAlphabet LabelAlphabet::make(CaseMode mode) {
  LabelAlphabet a;
  a.mode_ = mode;
  auto push_range = [&](char first) {
    for (char c = first; c < first + 26; ++c) a.symbols_.emplace_back(1, c);
  };
  switch (mode) {
    case CaseMode::lower: push_range('a'); break;
    case CaseMode::upper: push_range('A'); break;
    case CaseMode::combined:
      push_range('A');
      push_range('a');
      break;
    case CaseMode::custom: fail("custom alphabets need an explicit symbol list");
  }
  return a;
}

LabelAlphabet LabelAlphabet::custom(std::vector<std::string> symbols) {
  std::unordered_set<std::string> seen;
  for (const auto& s : symbols) {
    if (s.empty()) fail("empty class symbol");
    if (!seen.insert(s).second) fail("duplicate class symbol '" + s + "'");
  }
  LabelAlphabet a;
  a.symbols_ = std::move(symbols);
  a.mode_ = CaseMode::custom;
  return a;
}

std::optional<std::size_t> LabelAlphabet::index_of(std::string_view symbol) const {
  auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
  if (it == symbols_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - symbols_.begin());
}

std::size_t LabelAlphabet::require_index(std::string_view symbol) const {
  auto idx = index_of(symbol);
  if (!idx) fail("label '" + std::string(symbol) + "' is not in the alphabet");
  return *idx;
}

std::vector<std::string> validate_dataset(const Dataset& ds) {
  std::vector<std::string> out;
  const auto& alpha = ds.alphabet;
  const std::size_t expected_size =
      alpha.mode() == CaseMode::combined ? 52 : (alpha.mode() == CaseMode::custom ? 0 : 26);
  if (expected_size != 0 && alpha.size() != expected_size) {
    out.push_back("alphabet: expected " + std::to_string(expected_size) + " symbols");
  }
  if (ds.split.fold < 0 || ds.split.fold > 4) {
    out.push_back("split: fold " + std::to_string(ds.split.fold) + " outside 0..4");
  }
  std::set<std::string> ids;
  for (const auto& s : ds.samples) {
    const std::string who = "sample " + s.id;
    if (!ids.insert(s.id).second) out.push_back(who + ": duplicate id");
    if (s.channels.size() != kChannels) {
      out.push_back(who + ": expected " + std::to_string(kChannels) + " channels");
      continue;
    }
    const std::size_t n = s.channels.front().size();
    if (n == 0) out.push_back(who + ": empty channel");
    for (std::size_t c = 1; c < kChannels; ++c) {
      if (s.channels[c].size() != n) {
        out.push_back(who + ": channel " + std::to_string(c) + " length mismatch");
        break;
      }
    }
    if (!alpha.index_of(s.label)) out.push_back(who + ": label '" + s.label + "' not in alphabet");
  }
  return out;
}

std::vector<std::string> validate_split_pair(const Dataset& train, const Dataset& test) {
  std::vector<std::string> out;
  if (train.split.dependency != Dependency::WI && test.split.dependency != Dependency::WI) {
    return out;
  }
  std::set<std::string> train_writers;
  for (const auto& s : train.samples) {
    if (s.writer) train_writers.insert(*s.writer);
  }
  std::set<std::string> reported;
  for (const auto& s : test.samples) {
    if (s.writer && train_writers.count(*s.writer) && reported.insert(*s.writer).second) {
      out.push_back("WI violation: writer " + *s.writer);
    }
  }
  return out;
}

SubsetStats compute_subset_stats(const Dataset& ds) {
  if (ds.empty()) fail("empty dataset");
  // Sorting first makes the floating-point sum independent of sample order.
  std::vector<double> lengths;
  lengths.reserve(ds.size());
  for (const auto& s : ds.samples) lengths.push_back(static_cast<double>(s.length()));
  std::sort(lengths.begin(), lengths.end());
  double sum = 0.0;
  for (double v : lengths) sum += v;
  const double n = static_cast<double>(lengths.size());
  const double mu = sum / n;
  double ss = 0.0;
  for (double v : lengths) ss += (v - mu) * (v - mu);
  return SubsetStats{mu, std::sqrt(ss / n), lengths.size()};
}

LabelAlphabet infer_alphabet(const std::vector<Sample>& samples) {
  std::vector<std::string> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  return infer_alphabet(labels);
}

LabelAlphabet infer_alphabet(const std::vector<std::string>& labels) {
  bool has_lower = false;
  bool has_upper = false;
  for (const auto& label : labels) {
    if (label.size() != 1) fail("label '" + label + "' is not a single letter");
    const char c = label[0];
    if (c >= 'a' && c <= 'z') {
      has_lower = true;
    } else if (c >= 'A' && c <= 'Z') {
      has_upper = true;
    } else {
      fail("label '" + label + "' is not a letter");
    }
  }
  if (has_lower && has_upper) return LabelAlphabet::make(CaseMode::combined);
  return LabelAlphabet::make(has_upper ? CaseMode::upper : CaseMode::lower);
}

}  // namespace mts
