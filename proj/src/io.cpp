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

#include "mts/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace mts::io {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) fail("non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view cell) {
  const std::string s = trim(cell);
  if (s.empty()) fail("empty numeric cell");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) fail("non-numeric cell '" + s + "'");
  if (!std::isfinite(v)) fail("non-finite value '" + s + "'");
  return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail_io("read failure on " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail_io("write failure on " + path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_digest(const std::filesystem::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(path))));
  return buf;
}

// --- dataset ---------------------------------------------------------------

std::string encode_sample(const Sample& s) {
  std::string line = "{\"id\":";
  line += json(s.id).dump();
  line += ",\"label\":";
  line += json(s.label).dump();
  line += ",\"writer\":";
  line += json(s.writer.value_or("")).dump();
  line += ",\"ch\":[";
  for (std::size_t c = 0; c < s.channels.size(); ++c) {
    if (c) line += ',';
    line += '[';
    for (std::size_t t = 0; t < s.channels[c].size(); ++t) {
      if (t) line += ',';
      line += format_double(s.channels[c][t]);
    }
    line += ']';
  }
  line += "]}";
  return line;
}

Sample decode_sample(std::string_view line, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no) + ": ";
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(where + "parse error: " + e.what());
  }
  if (!obj.is_object()) fail(where + "expected an object");
  for (const char* key : {"id", "label", "writer", "ch"}) {
    if (!obj.contains(key)) fail(where + "missing key '" + key + "'");
  }
  if (!obj["id"].is_string() || !obj["label"].is_string() || !obj["writer"].is_string()) {
    fail(where + "id, label and writer must be strings");
  }
  const auto& ch = obj["ch"];
  if (!ch.is_array()) fail(where + "'ch' must be an array");
  std::vector<Series> channels;
  channels.reserve(ch.size());
  for (const auto& arr : ch) {
    if (!arr.is_array()) fail(where + "channel entries must be arrays");
    Series series;
    series.reserve(arr.size());
    for (const auto& v : arr) {
      if (!v.is_number()) fail(where + "non-numeric channel value");
      series.push_back(v.get<double>());
    }
    channels.push_back(std::move(series));
  }
  std::string writer = obj["writer"].get<std::string>();
  std::optional<std::string> w;
  if (!writer.empty()) w = std::move(writer);
  try {
    return Sample::make(obj["id"].get<std::string>(), obj["label"].get<std::string>(),
                        std::move(w), std::move(channels));
  } catch (const Error& e) {
    fail(where + e.what());
  }
}

Dataset read_dataset(const std::filesystem::path& path, const SplitSpec& split,
                     std::optional<CaseMode> mode) {
  const std::string text = read_file(path);
  Dataset ds;
  ds.split = split;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) ds.samples.push_back(decode_sample(line, line_no));
    start = end + 1;
  }
  if (ds.empty()) fail(path.string() + ": empty dataset");
  ds.alphabet = mode ? LabelAlphabet::make(*mode) : infer_alphabet(ds.samples);
  const auto violations = validate_dataset(ds);
  if (!violations.empty()) {
    std::string msg = path.string() + ": invalid dataset";
    for (const auto& v : violations) msg += "\n  " + v;
    fail(msg);
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::string out;
  for (const auto& s : ds.samples) {
    out += encode_sample(s);
    out += '\n';
  }
  write_file(path, out);
}

// --- tables ----------------------------------------------------------------

void Table::add_row(std::vector<std::string> key, std::vector<double> vals,
                    std::vector<std::string> tail) {
  keys.push_back(std::move(key));
  values.push_back(std::move(vals));
  tails.push_back(std::move(tail));
}

namespace {

void check_text_cell(const std::string& cell) {
  if (cell.find_first_of(",\n\r\"") != std::string::npos) {
    fail("text cell '" + cell + "' contains a separator or quote");
  }
}

void check_header(const Table& t) {
  std::set<std::string> seen;
  for (const auto* names : {&t.key_names, &t.value_names, &t.tail_names}) {
    for (const auto& n : *names) {
      check_text_cell(n);
      if (!seen.insert(n).second) fail("duplicate header name '" + n + "'");
    }
  }
}

}  // namespace

std::string render_table(const Table& t) {
  check_header(t);
  std::string out;
  for (const auto& p : t.preamble) {
    if (p.find('\n') != std::string::npos) fail("preamble line contains a newline");
    out += '#';
    out += p;
    out += '\n';
  }
  bool first = true;
  auto cell = [&](const std::string& s) {
    if (!first) out += ',';
    out += s;
    first = false;
  };
  for (const auto& n : t.key_names) cell(n);
  for (const auto& n : t.value_names) cell(n);
  for (const auto& n : t.tail_names) cell(n);
  out += '\n';
  if (t.keys.size() != t.values.size() || t.tails.size() != t.values.size()) {
    fail("table row bookkeeping is inconsistent");
  }
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (t.keys[r].size() != t.key_names.size() || t.values[r].size() != t.value_names.size() ||
        t.tails[r].size() != t.tail_names.size()) {
      fail("ragged row " + std::to_string(r));
    }
    first = true;
    for (const auto& k : t.keys[r]) {
      check_text_cell(k);
      cell(k);
    }
    for (double v : t.values[r]) cell(format_double(v));
    for (const auto& k : t.tails[r]) {
      check_text_cell(k);
      cell(k);
    }
    out += '\n';
  }
  return out;
}

void write_table(const Table& t, const std::filesystem::path& path) {
  write_file(path, render_table(t));
}

Table parse_table(std::string_view text, std::size_t n_key_columns, std::size_t n_tail_columns,
                  std::string_view source_name) {
  Table t;
  const std::string src(source_name);
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool have_header = false;
  std::size_t width = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = src + ":" + std::to_string(line_no) + ": ";
    if (!have_header && line.front() == '#') {
      t.preamble.emplace_back(line.substr(1));
      continue;
    }
    auto cells = split(line, ',');
    if (!have_header) {
      width = cells.size();
      if (width < n_key_columns + n_tail_columns) fail(where + "too few header columns");
      std::set<std::string> seen;
      for (std::size_t i = 0; i < width; ++i) {
        std::string name = trim(cells[i]);
        if (!seen.insert(name).second) fail(where + "duplicate header name '" + name + "'");
        if (i < n_key_columns) {
          t.key_names.push_back(std::move(name));
        } else if (i >= width - n_tail_columns) {
          t.tail_names.push_back(std::move(name));
        } else {
          t.value_names.push_back(std::move(name));
        }
      }
      have_header = true;
      continue;
    }
    if (cells.size() != width) {
      fail(where + "ragged row: expected " + std::to_string(width) + " cells, found " +
           std::to_string(cells.size()));
    }
    std::vector<std::string> key;
    std::vector<double> vals;
    std::vector<std::string> tail;
    for (std::size_t i = 0; i < width; ++i) {
      if (i < n_key_columns) {
        key.push_back(trim(cells[i]));
      } else if (i >= width - n_tail_columns) {
        tail.push_back(trim(cells[i]));
      } else {
        try {
          vals.push_back(parse_double(cells[i]));
        } catch (const Error& e) {
          fail(where + e.what());
        }
      }
    }
    t.add_row(std::move(key), std::move(vals), std::move(tail));
  }
  if (!have_header) fail(src + ": missing header row");
  return t;
}

Table read_table(const std::filesystem::path& path, std::size_t n_key_columns,
                 std::size_t n_tail_columns) {
  return parse_table(read_file(path), n_key_columns, n_tail_columns, path.string());
}

// --- config ----------------------------------------------------------------

Config Config::parse(std::string_view text, std::string_view source_name) {
  Config cfg;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(std::string(source_name) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail(std::string(source_name) + ":" + std::to_string(line_no) + ": empty key");
    cfg.set(std::move(key), std::move(value));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

std::optional<std::string> Config::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Config::get_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::vector<std::pair<std::string, std::string>> Config::with_prefix(
    std::string_view prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_) {
    if (k.size() > prefix.size() && std::string_view(k).substr(0, prefix.size()) == prefix) {
      out.emplace_back(k.substr(prefix.size()), v);
    }
  }
  return out;
}

void Config::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

// --- raw import ------------------------------------------------------------

ImportConfig ImportConfig::from_config(const Config& cfg) {
  ImportConfig ic;
  ic.id_column = cfg.get_or("import.id_column", ic.id_column);
  ic.label_column = cfg.get_or("import.label_column", ic.label_column);
  ic.writer_column = cfg.get_or("import.writer_column", "");
  ic.time_column = cfg.get_or("import.time_column", "");
  if (auto m = cfg.get("import.case_mode")) ic.case_mode = case_mode_from_string(*m);
  for (const auto& [column, id_text] : cfg.with_prefix("import.channel.")) {
    int id = -1;
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc() || ptr != id_text.data() + id_text.size() || id < 0 ||
        id >= static_cast<int>(kChannels)) {
      fail("import.channel." + column + ": invalid channel id '" + id_text + "'");
    }
    auto& slot = ic.channel_columns[static_cast<std::size_t>(id)];
    if (!slot.empty()) fail("channel " + id_text + " mapped twice");
    slot = column;
  }
  return ic;
}

Dataset import_raw(const ImportConfig& config, const std::filesystem::path& path,
                   const SplitSpec& split) {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (config.channel_columns[c].empty()) {
      fail("unmapped channel " + std::to_string(c) + " (" + std::string(channel_name(int(c))) +
           ")");
    }
    if (config.channel_columns[c] == config.time_column) {
      fail("channel " + std::to_string(c) + " is mapped to the time column");
    }
  }
  const std::string text = read_file(path);
  auto lines = io::split(text, '\n');
  std::size_t line_no = 0;
  std::vector<std::string> header;
  for (; line_no < lines.size(); ++line_no) {
    if (!trim(lines[line_no]).empty()) {
      header = io::split(trim(lines[line_no]), ',');
      break;
    }
  }
  if (header.empty()) fail(path.string() + ": empty dataset");
  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[trim(header[i])] = i;
  auto require = [&](const std::string& name) -> std::size_t {
    auto it = col_index.find(name);
    if (it == col_index.end()) fail(path.string() + ": source column '" + name + "' not found");
    return it->second;
  };
  const std::size_t id_col = require(config.id_column);
  const std::size_t label_col = require(config.label_column);
  std::optional<std::size_t> writer_col;
  if (!config.writer_column.empty()) writer_col = require(config.writer_column);
  std::array<std::size_t, kChannels> ch_col{};
  for (std::size_t c = 0; c < kChannels; ++c) ch_col[c] = require(config.channel_columns[c]);

  struct Pending {
    std::string label;
    std::optional<std::string> writer;
    std::vector<Series> channels = std::vector<Series>(kChannels);
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Pending> pending;

  for (++line_no; line_no < lines.size(); ++line_no) {
    const std::string line = trim(lines[line_no]);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no + 1) + ": ";
    auto cells = io::split(line, ',');
    if (cells.size() != header.size()) fail(where + "ragged row");
    const std::string id = trim(cells[id_col]);
    auto [it, inserted] = pending.try_emplace(id);
    Pending& p = it->second;
    if (inserted) {
      order.push_back(id);
      p.label = trim(cells[label_col]);
      if (writer_col) {
        std::string w = trim(cells[*writer_col]);
        if (!w.empty()) p.writer = std::move(w);
      }
    } else if (trim(cells[label_col]) != p.label) {
      fail(where + "sample " + id + " changes label mid-sequence");
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
      const std::string cell = trim(cells[ch_col[c]]);
      if (cell.empty()) continue;
      try {
        p.channels[c].push_back(parse_double(cell));
      } catch (const Error& e) {
        fail(where + e.what());
      }
    }
  }
  Dataset ds;
  ds.split = split;
  for (const auto& id : order) {
    Pending& p = pending[id];
    const std::size_t n = p.channels[0].size();
    for (std::size_t c = 1; c < kChannels; ++c) {
      if (p.channels[c].size() != n) {
        fail("sample " + id + ": inconsistent per-sample lengths (channel " +
             std::string(channel_name(int(c))) + " has " + std::to_string(p.channels[c].size()) +
             " values, expected " + std::to_string(n) + ")");
      }
    }
    ds.samples.push_back(Sample::make(id, std::move(p.label), std::move(p.writer),
                                      std::move(p.channels)));
  }
  if (ds.empty()) fail(path.string() + ": empty dataset");
  ds.alphabet = config.case_mode ? LabelAlphabet::make(*config.case_mode)
                                 : infer_alphabet(ds.samples);
  const auto violations = validate_dataset(ds);
  if (!violations.empty()) fail(violations.front());
  return ds;
}

}  // namespace mts::io
