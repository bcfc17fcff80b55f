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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mts/core.hpp"

namespace mts::io {

/// `%.17g` rendering; enough digits for every finite double to round-trip.
std::string format_double(double v);
/// Strict decimal parse of a full cell; throws on trailing garbage.
double parse_double(std::string_view cell);

// ---------------------------------------------------------------------------
// Dataset files (.mtsl): one JSON object per line,
//   {"id":"s1","label":"a","writer":"w3","ch":[[...13 arrays...]]}
// An absent writer is written as "".

std::string encode_sample(const Sample& s);
/// Parses one line; `line_no` is only used for error messages.
Sample decode_sample(std::string_view line, std::size_t line_no);

/// Reads and validates a dataset. The alphabet is inferred from the labels
/// unless `mode` is given.
Dataset read_dataset(const std::filesystem::path& path, const SplitSpec& split,
                     std::optional<CaseMode> mode = std::nullopt);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Matrix files (.csv). Header row, then data rows. Columns are split into
// leading text keys, numeric values and optional trailing text columns.
// Lines beginning with '#' before the header form a preamble.

struct Table {
  std::vector<std::string> preamble;
  std::vector<std::string> key_names;
  std::vector<std::string> value_names;
  std::vector<std::string> tail_names;
  std::vector<std::vector<std::string>> keys;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::string>> tails;

  std::size_t rows() const { return values.size(); }
  void add_row(std::vector<std::string> key, std::vector<double> vals,
               std::vector<std::string> tail = {});
  bool operator==(const Table&) const = default;
};

void write_table(const Table& t, const std::filesystem::path& path);
std::string render_table(const Table& t);
Table read_table(const std::filesystem::path& path, std::size_t n_key_columns,
                 std::size_t n_tail_columns = 0);
Table parse_table(std::string_view text, std::size_t n_key_columns, std::size_t n_tail_columns,
                  std::string_view source_name);

// ---------------------------------------------------------------------------
// Flat `section.key = value` configuration text. '#' starts a comment.

class Config {
 public:
  static Config parse(std::string_view text, std::string_view source_name = "config");
  static Config load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  /// All entries whose key starts with `prefix`, with the prefix removed.
  std::vector<std::pair<std::string, std::string>> with_prefix(std::string_view prefix) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  void set(std::string key, std::string value);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// ---------------------------------------------------------------------------
// Raw import. The source is a long-format CSV with one row per timestep.
// Rows of a sample are grouped by the id column. Empty cells count as
// missing values, which is how unequal channel streams show up.

struct ImportConfig {
  std::string id_column = "id";
  std::string label_column = "label";
  std::string writer_column;  // empty: no writer information
  std::string time_column;    // dropped when present
  /// Source column for each canonical channel id.
  std::array<std::string, kChannels> channel_columns;
  std::optional<CaseMode> case_mode;

  /// Reads `import.id_column`, `import.label_column`, `import.writer_column`,
  /// `import.time_column`, `import.case_mode` and `import.channel.<column> = <id>`.
  static ImportConfig from_config(const Config& cfg);
};

Dataset import_raw(const ImportConfig& config, const std::filesystem::path& path,
                   const SplitSpec& split = {});

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
/// 64-bit FNV-1a of the file bytes, lowercase hex.
std::string file_digest(const std::filesystem::path& path);
std::uint64_t fnv1a64(std::string_view bytes);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

}  // namespace mts::io
