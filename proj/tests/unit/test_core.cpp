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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "mts/core.hpp"
#include "support/synthetic.hpp"

using namespace mts;

namespace {

Sample constant_sample(const std::string& id, const std::string& label, std::size_t n,
                       std::optional<std::string> writer = std::nullopt) {
  return Sample::make(id, label, std::move(writer), std::vector<Series>(kChannels, Series(n, 1.0)));
}

Dataset three_samples() {
  Dataset ds;
  ds.samples = {constant_sample("s0", "a", 10), constant_sample("s1", "b", 12), constant_sample("s2", "z", 9)};
  return ds;
}

}  // namespace

TEST_CASE("well formed dataset has no violations") { CHECK(validate_dataset(three_samples()).empty()); }

TEST_CASE("twelve channel record is reported by sample id") {
  Dataset ds = three_samples();
  ds.samples[1].id = "s1";
  ds.samples[1].channels.pop_back();
  const auto v = validate_dataset(ds);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "sample s1: expected 13 channels");
}

TEST_CASE("label outside the alphabet is a violation") {
  Dataset ds = three_samples();
  ds.samples[0].label = "A";
  const auto v = validate_dataset(ds);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("sample s0") != std::string::npos);
}

TEST_CASE("fold outside 0..4 is a violation") {
  Dataset ds = three_samples();
  ds.split.fold = 5;
  CHECK(validate_dataset(ds).size() == 1);
}

TEST_CASE("writer shared across a WI split is reported") {
  Dataset train, test;
  train.split = {0, Dependency::WI, Role::train};
  test.split = {0, Dependency::WI, Role::test};
  train.samples = {constant_sample("a0", "a", 5, "w1"), constant_sample("a1", "a", 5, "w7")};
  test.samples = {constant_sample("b0", "b", 5, "w7"), constant_sample("b1", "b", 5, "w2")};
  const auto v = validate_split_pair(train, test);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "WI violation: writer w7");

  train.split.dependency = test.split.dependency = Dependency::WD;
  CHECK(validate_split_pair(train, test).empty());
}

TEST_CASE("subset stats closed forms") {
  Dataset ds;
  ds.samples = {constant_sample("x", "a", 10), constant_sample("y", "a", 10), constant_sample("z", "a", 10)};
  auto s = compute_subset_stats(ds);
  CHECK(s.mu == 10.0);
  CHECK(s.sigma == 0.0);
  CHECK(s.n == 3);

  ds.samples = {constant_sample("x", "a", 10), constant_sample("y", "a", 20)};
  s = compute_subset_stats(ds);
  CHECK(s.mu == doctest::Approx(15.0));
  CHECK(s.sigma == doctest::Approx(5.0));
}

TEST_CASE("subset stats of an empty dataset fails") {
  Dataset ds;
  CHECK_THROWS_WITH_AS(compute_subset_stats(ds), "empty dataset", Error);
}

TEST_CASE("subset stats are invariant under sample permutation") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 200);
  Dataset ds;
  for (int i = 0; i < 57; ++i) ds.samples.push_back(constant_sample("s" + std::to_string(i), "a", len(rng)));
  const auto ref = compute_subset_stats(ds);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(ds.samples.begin(), ds.samples.end(), rng);
    const auto s = compute_subset_stats(ds);
    CHECK(s.mu == ref.mu);
    CHECK(s.sigma == ref.sigma);
  }
}

TEST_CASE("perturbing one channel length always breaks the sample") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  std::uniform_int_distribution<int> ch(0, kChannels - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    std::vector<Series> channels(kChannels, Series(n, 0.5));
    const int c = ch(rng);
    if (trial % 2) {
      channels[static_cast<std::size_t>(c)].push_back(0.0);
    } else {
      channels[static_cast<std::size_t>(c)].pop_back();
    }
    CHECK_THROWS_AS(Sample::make("p", "a", std::nullopt, channels), Error);

    Dataset ds;
    Sample s;
    s.id = "p";
    s.label = "a";
    s.channels = channels;
    ds.samples.push_back(s);
    CHECK_FALSE(validate_dataset(ds).empty());
  }
}

TEST_CASE("alphabets") {
  CHECK(LabelAlphabet::make(CaseMode::lower).size() == 26);
  CHECK(LabelAlphabet::make(CaseMode::upper).size() == 26);
  const auto combined = LabelAlphabet::make(CaseMode::combined);
  CHECK(combined.size() == 52);
  CHECK(combined[0] == "A");
  CHECK(combined[26] == "a");
  CHECK(infer_alphabet(std::vector<std::string>{"a", "q"}).mode() == CaseMode::lower);
  CHECK(infer_alphabet(std::vector<std::string>{"B"}).mode() == CaseMode::upper);
  CHECK(infer_alphabet(std::vector<std::string>{"B", "c"}).mode() == CaseMode::combined);
  CHECK_THROWS_AS(LabelAlphabet::custom({"x", "x"}), Error);
  CHECK_THROWS_AS(LabelAlphabet::make(CaseMode::lower).require_index("A"), Error);
}

TEST_CASE("channel names follow the fixed order") {
  CHECK(channel_name(kAccFrontX).size() > 0);
  CHECK(channel_name(kForce) != channel_name(kMagZ));
}
