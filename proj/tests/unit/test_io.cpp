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

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mts/features.hpp"
#include "mts/io.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace mts;
using mts::testing::TempDir;

namespace {

Dataset random_dataset(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> len(1, 30);
  std::normal_distribution<double> g(0.0, 1e3);
  std::uniform_int_distribution<int> letter(0, 25);
  Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t L = len(rng);
    std::vector<Series> ch(kChannels, Series(L));
    for (auto& s : ch)
      for (double& v : s) v = g(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    std::optional<std::string> w;
    if (i % 3) w = "w" + std::to_string(i % 4);
    ds.samples.push_back(
        Sample::make("id" + std::to_string(i), std::string(1, static_cast<char>('a' + letter(rng))), w, ch));
  }
  return ds;
}

}  // namespace

TEST_CASE("dataset round trip is bit exact") {
  std::mt19937_64 rng(42);
  TempDir dir;
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset ds = random_dataset(rng, 10);
    io::write_dataset(ds, dir / "d.mtsl");
    const Dataset back = io::read_dataset(dir / "d.mtsl", {}, CaseMode::lower);
    CHECK(back == ds);
  }
}

TEST_CASE("0.1 + 0.2 survives a decimal round trip bit for bit") {
  const double v = 0.1 + 0.2;
  const double back = io::parse_double(io::format_double(v));
  CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));

  TempDir dir;
  Dataset ds;
  ds.samples.push_back(Sample::make("x", "a", std::nullopt, std::vector<Series>(kChannels, Series{v, -v, 1e-310})));
  io::write_dataset(ds, dir / "x.mtsl");
  const auto r = io::read_dataset(dir / "x.mtsl", {});
  CHECK(std::bit_cast<std::uint64_t>(r.samples[0].channels[4][0]) == std::bit_cast<std::uint64_t>(v));
  CHECK(r.samples[0].channels[4][2] == 1e-310);
}

TEST_CASE("empty writer serializes and restores as absent") {
  Sample s = Sample::make("x", "a", std::nullopt, std::vector<Series>(kChannels, Series{1.0}));
  const std::string line = io::encode_sample(s);
  CHECK(line.find("\"writer\":\"\"") != std::string::npos);
  CHECK_FALSE(io::decode_sample(line, 1).writer.has_value());
}

TEST_CASE("two valid records read back as two samples") {
  TempDir dir;
  Dataset ds;
  ds.samples.push_back(Sample::make("p", "a", "w1", std::vector<Series>(kChannels, Series{1.0, 2.0})));
  ds.samples.push_back(Sample::make("q", "b", "w2", std::vector<Series>(kChannels, Series{3.0})));
  io::write_dataset(ds, dir / "two.mtsl");
  CHECK(io::read_dataset(dir / "two.mtsl", {}).size() == 2);
}

TEST_CASE("twelve channel record names the line") {
  TempDir dir;
  Sample good = Sample::make("p", "a", std::nullopt, std::vector<Series>(kChannels, Series{1.0}));
  Sample bad = good;
  bad.id = "s1";
  bad.channels.pop_back();
  io::write_file(dir / "bad.mtsl", io::encode_sample(good) + "\n" + io::encode_sample(bad) + "\n");
  try {
    io::read_dataset(dir / "bad.mtsl", {});
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(e.kind() == ErrorKind::validation);
  }
}

TEST_CASE("empty dataset file is an error") {
  TempDir dir;
  io::write_file(dir / "e.mtsl", "");
  CHECK_THROWS_WITH_AS(io::read_dataset(dir / "e.mtsl", {}), doctest::Contains("empty dataset"), Error);
}

TEST_CASE("missing file is an io error") {
  try {
    io::read_dataset("/nonexistent/nowhere.mtsl", {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("matrix round trip keeps header and values") {
  TempDir dir;
  features::FeatureMatrix fm;
  fm.columns = {"c0", "c1", "c2"};
  fm.sample_ids = {"x", "y"};
  fm.labels = {"a", "b"};
  fm.values.resize(2, 3);
  fm.values << 0.1 + 0.2, -1e300, 3.0, 4.5e-300, 5.0, 1.0 / 3.0;
  features::write_feature_matrix(fm, dir / "m.csv");
  const auto back = features::read_feature_matrix(dir / "m.csv");
  CHECK(back.columns == fm.columns);
  CHECK(back.sample_ids == fm.sample_ids);
  CHECK(back.labels == fm.labels);
  CHECK(back.values == fm.values);
}

TEST_CASE("NaN cell refuses to serialize") {
  io::Table t;
  t.value_names = {"v"};
  t.add_row({}, {std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_WITH_AS(io::render_table(t), "non-finite value", Error);
}

TEST_CASE("duplicate header names are rejected") {
  io::Table t;
  t.value_names = {"v", "v"};
  CHECK_THROWS_AS(io::render_table(t), Error);
  CHECK_THROWS_AS(io::parse_table("a,b,a\n1,2,3\n", 0, 0, "mem"), Error);
}

TEST_CASE("ragged rows are rejected") {
  CHECK_THROWS_WITH_AS(io::parse_table("a,b\n1,2\n3\n", 0, 0, "mem"), doctest::Contains("ragged"), Error);
}

TEST_CASE("config parsing") {
  auto cfg = io::Config::parse("# comment\na.b = 1\n\nc.d=two words  # trailing\n");
  CHECK(cfg.get("a.b") == "1");
  CHECK(cfg.get("c.d") == "two words");
  CHECK_FALSE(cfg.get("x").has_value());
  CHECK_THROWS_AS(io::Config::parse("novalue\n"), Error);
}

namespace {

std::string raw_header(bool with_time, const std::vector<int>& perm) {
  std::string h = "id,label,writer";
  if (with_time) h += ",time";
  for (int c : perm) h += ",src" + std::to_string(c);
  return h;
}

io::ImportConfig mapping(const std::vector<int>& perm, bool with_time) {
  io::ImportConfig ic;
  ic.writer_column = "writer";
  if (with_time) ic.time_column = "time";
  for (int c : perm) ic.channel_columns[static_cast<std::size_t>(c)] = "src" + std::to_string(c);
  return ic;
}

}  // namespace

TEST_CASE("import drops the time column and keeps 13 channels") {
  TempDir dir;
  std::vector<int> perm(kChannels);
  std::iota(perm.begin(), perm.end(), 0);
  std::string csv = raw_header(true, perm) + "\n";
  for (int t = 0; t < 4; ++t) {
    csv += "s1,a,w1," + std::to_string(t * 10);
    for (int c = 0; c < static_cast<int>(kChannels); ++c) csv += "," + std::to_string(c + t * 0.5);
    csv += "\n";
  }
  io::write_file(dir / "raw.csv", csv);
  const auto ds = io::import_raw(mapping(perm, true), dir / "raw.csv");
  REQUIRE(ds.size() == 1);
  CHECK(ds.samples[0].channels.size() == kChannels);
  CHECK(ds.samples[0].length() == 4);
  CHECK(ds.samples[0].channels[12][3] == 12 + 1.5);
  CHECK(ds.samples[0].writer == "w1");
}

TEST_CASE("permuted source columns are mapped to canonical order") {
  TempDir dir;
  std::vector<int> perm(kChannels);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  // Column j of the file holds channel perm[j] with value 100 * perm[j] + t.
  std::string csv = raw_header(false, perm) + "\n";
  for (int t = 0; t < 3; ++t) {
    csv += "q,b,w2";
    for (int c : perm) csv += "," + std::to_string(100 * c + t);
    csv += "\n";
  }
  io::write_file(dir / "raw.csv", csv);
  const auto ds = io::import_raw(mapping(perm, false), dir / "raw.csv");
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t t = 0; t < 3; ++t) CHECK(ds.samples[0].channels[c][t] == 100.0 * c + t);
  }
}

TEST_CASE("short gyro stream is reported with the sample id") {
  TempDir dir;
  std::vector<int> perm(kChannels);
  std::iota(perm.begin(), perm.end(), 0);
  std::string csv = raw_header(false, perm) + "\n";
  for (int t = 0; t < 3; ++t) {
    csv += "g7,c,w3";
    for (int c = 0; c < static_cast<int>(kChannels); ++c) {
      csv += ",";
      if (!(c == kGyroY && t == 2)) csv += "1.5";
    }
    csv += "\n";
  }
  io::write_file(dir / "raw.csv", csv);
  CHECK_THROWS_WITH_AS(io::import_raw(mapping(perm, false), dir / "raw.csv"), doctest::Contains("sample g7"),
                       Error);
}

TEST_CASE("unmapped channel and non-numeric cell are import errors") {
  TempDir dir;
  std::vector<int> perm(kChannels);
  std::iota(perm.begin(), perm.end(), 0);
  auto ic = mapping(perm, false);
  ic.channel_columns[3].clear();
  io::write_file(dir / "raw.csv", raw_header(false, perm) + "\n");
  CHECK_THROWS_WITH_AS(io::import_raw(ic, dir / "raw.csv"), doctest::Contains("unmapped channel 3"), Error);

  std::string csv = raw_header(false, perm) + "\nx,a,w";
  for (std::size_t c = 0; c < kChannels; ++c) csv += c == 4 ? ",abc" : ",1";
  io::write_file(dir / "raw.csv", csv + "\n");
  CHECK_THROWS_WITH_AS(io::import_raw(mapping(perm, false), dir / "raw.csv"), doctest::Contains("non-numeric"),
                       Error);
}

TEST_CASE("file digest is stable and content sensitive") {
  TempDir dir;
  io::write_file(dir / "a", "hello");
  io::write_file(dir / "b", "hello");
  io::write_file(dir / "c", "hellp");
  CHECK(io::file_digest(dir / "a") == io::file_digest(dir / "b"));
  CHECK(io::file_digest(dir / "a") != io::file_digest(dir / "c"));
  CHECK(io::file_digest(dir / "a").size() == 16);
  // Published FNV-1a test vector.
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
