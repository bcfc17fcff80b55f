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
#include <fstream>
#include <random>

#include "doctest.h"
#include "mts/ensemble.hpp"
#include "mts/log.hpp"
#include "support/tempdir.hpp"

using namespace mts;
using namespace mts::ensemble;

namespace {

LabelAlphabet abc() { return LabelAlphabet::custom({"a", "b", "c"}); }

std::vector<double> one_hot(std::size_t c, std::size_t n = 3) {
  std::vector<double> v(n, 0.0);
  v[c] = 1.0;
  return v;
}

/// One sample, every model voting for the class given in `votes`.
PredictionMatrix hard(const std::vector<std::size_t>& votes) {
  PredictionMatrix pm;
  pm.alphabet = abc();
  pm.sample_ids = {"s0"};
  for (std::size_t m = 0; m < votes.size(); ++m) {
    pm.model_ids.push_back("m" + std::to_string(m));
    pm.tensor.push_back({one_hot(votes[m])});
  }
  return pm;
}

PredictionMatrix random_tensor(std::mt19937_64& rng, std::size_t models, std::size_t samples, std::size_t classes) {
  PredictionMatrix pm;
  std::vector<std::string> symbols;
  for (std::size_t c = 0; c < classes; ++c) symbols.push_back("k" + std::to_string(c));
  pm.alphabet = LabelAlphabet::custom(symbols);
  for (std::size_t s = 0; s < samples; ++s) pm.sample_ids.push_back("s" + std::to_string(s));
  std::gamma_distribution<double> g(0.5, 1.0);
  for (std::size_t m = 0; m < models; ++m) {
    pm.model_ids.push_back("m" + std::to_string(m));
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < samples; ++s) {
      std::vector<double> row(classes);
      double sum = 0.0;
      for (double& v : row) sum += (v = g(rng) + 1e-12);
      for (double& v : row) v /= sum;
      rows.push_back(row);
    }
    pm.tensor.push_back(rows);
  }
  return pm;
}

TierWeights weights_for(const PredictionMatrix& pm, const std::vector<double>& w) {
  TierWeights out;
  for (std::size_t m = 0; m < pm.models(); ++m) out[pm.model_ids[m]] = w[m];
  return out;
}

}  // namespace

TEST_CASE("plurality examples") {
  CHECK(plurality_vote(hard({0, 0, 1, 2}), {"m0", "m1", "m2", "m3"}).labels[0] == 0);
  CHECK(plurality_vote(hard({1, 1, 0, 0}), {"m0", "m1", "m2", "m3"}).labels[0] == 0);
  CHECK(plurality_vote(hard({2}), {"m0"}).labels[0] == 2);
  CHECK(plurality_vote(hard({2, 1, 1}), {"m0", "m1", "m2"}).labels[0] == 1);
  CHECK_THROWS_AS(plurality_vote(hard({0}), {"nope"}), Error);
  CHECK_THROWS_AS(plurality_vote(hard({0}), {}), Error);
}

TEST_CASE("tier dominance with the canonical weights") {
  // Eight unanimous bottom-tier models against one middle-tier model.
  std::vector<std::size_t> votes(8, 0);
  votes.push_back(1);
  auto pm = hard(votes);
  std::vector<double> w(8, kBottomTier);
  w.push_back(kMiddleTier);
  std::vector<std::string> all = pm.model_ids;
  CHECK(weighted_vote(pm, weights_for(pm, w), all).labels[0] == 1);

  // Four middle plus eight bottom against one top-tier model.
  votes.assign(12, 0);
  votes.push_back(1);
  pm = hard(votes);
  w.assign(4, kMiddleTier);
  w.insert(w.end(), 8, kBottomTier);
  w.push_back(kTopTier);
  all = pm.model_ids;
  CHECK(weighted_vote(pm, weights_for(pm, w), all).labels[0] == 1);

  // The default assignment has 4 / 4 / 8 members.
  std::map<double, int> tiers;
  for (const auto& [id, v] : default_tier_weights()) ++tiers[v];
  CHECK(tiers[kTopTier] == 4);
  CHECK(tiers[kMiddleTier] == 4);
  CHECK(tiers[kBottomTier] == 8);
}

TEST_CASE("equal weights reduce weighted voting to plurality") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto pm = random_tensor(rng, 5, 20, 4);
    const auto w = weights_for(pm, std::vector<double>(5, 3.0));
    CHECK(weighted_vote(pm, w, pm.model_ids).labels == plurality_vote(pm, pm.model_ids).labels);
  }
}

TEST_CASE("soft vote examples") {
  PredictionMatrix pm;
  pm.alphabet = LabelAlphabet::custom({"x", "y"});
  pm.sample_ids = {"s"};
  pm.model_ids = {"A", "B"};
  pm.tensor = {{{0.6, 0.4}}, {{0.2, 0.8}}};
  const auto r = soft_vote(pm, pm.model_ids);
  CHECK(r.labels[0] == 1);
  CHECK(r.scores[0][0] == doctest::Approx(0.4));
  CHECK(r.scores[0][1] == doctest::Approx(0.6));

  pm.tensor = {{{0.9, 0.1}}, {{0.3, 0.7}}};
  const auto ws = weighted_soft_vote(pm, {{"A", 1.0}, {"B", 9.0}}, pm.model_ids);
  CHECK(ws.labels[0] == 1);
  // 1*0.9 + 9*0.3 and 1*0.1 + 9*0.7 before dividing by the weight total.
  CHECK(ws.scores[0][0] * 10.0 == doctest::Approx(3.6));
  CHECK(ws.scores[0][1] * 10.0 == doctest::Approx(6.4));
  CHECK_THROWS_AS(weighted_soft_vote(pm, {{"A", 1.0}}, pm.model_ids), Error);
  CHECK_THROWS_AS(weighted_soft_vote(pm, {{"A", 1.0}, {"B", -1.0}}, pm.model_ids), Error);

  pm.tensor = {{{0.25, 0.75}}, {{0.25, 0.75}}};
  const auto same = soft_vote(pm, pm.model_ids);
  CHECK(same.scores[0] == std::vector<double>{0.25, 0.75});
}

TEST_CASE("soft equals weighted-soft under equal weights") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 500; ++t) {
    const auto pm = random_tensor(rng, 1 + rng() % 6, 1 + rng() % 8, 2 + rng() % 5);
    const auto soft = soft_vote(pm, pm.model_ids);
    const auto unit = weighted_soft_vote(pm, weights_for(pm, std::vector<double>(pm.models(), 1.0)), pm.model_ids);
    CHECK(soft.labels == unit.labels);
    CHECK(soft.scores == unit.scores);
    const auto scaled = weighted_soft_vote(pm, weights_for(pm, std::vector<double>(pm.models(), 2.5)), pm.model_ids);
    CHECK(soft.labels == scaled.labels);
    for (std::size_t s = 0; s < pm.samples(); ++s) {
      double sum = 0.0;
      for (std::size_t c = 0; c < soft.scores[s].size(); ++c) {
        CHECK(scaled.scores[s][c] == doctest::Approx(soft.scores[s][c]).epsilon(1e-12));
        sum += soft.scores[s][c];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("scaling all weights leaves every argmax unchanged") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  for (int t = 0; t < 100; ++t) {
    const auto pm = random_tensor(rng, 6, 10, 4);
    std::vector<double> w(6), w10(6);
    for (std::size_t i = 0; i < 6; ++i) w10[i] = 10.0 * (w[i] = u(rng));
    CHECK(weighted_soft_vote(pm, weights_for(pm, w), pm.model_ids).labels ==
          weighted_soft_vote(pm, weights_for(pm, w10), pm.model_ids).labels);
    CHECK(weighted_vote(pm, weights_for(pm, w), pm.model_ids).labels ==
          weighted_vote(pm, weights_for(pm, w10), pm.model_ids).labels);
  }
}

TEST_CASE("exact probability ties go to the earliest symbol") {
  PredictionMatrix pm;
  pm.alphabet = abc();
  pm.sample_ids = {"s"};
  pm.model_ids = {"A", "B"};
  pm.tensor = {{{0.0, 0.5, 0.5}}, {{0.0, 0.5, 0.5}}};
  CHECK(soft_vote(pm, pm.model_ids).labels[0] == 1);
  pm.tensor = {{{0.0, 1.0, 0.0}}, {{0.0, 0.0, 1.0}}};
  CHECK(weighted_soft_vote(pm, {{"A", 2.0}, {"B", 2.0}}, pm.model_ids).labels[0] == 1);
}

TEST_CASE("every scheme is invariant to model order") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  for (int t = 0; t < 50; ++t) {
    const auto pm = random_tensor(rng, 5, 12, 3);
    TierWeights w;
    for (const auto& id : pm.model_ids) w[id] = std::round(u(rng));
    auto order = pm.model_ids;
    std::shuffle(order.begin(), order.end(), rng);
    for (auto scheme : {Scheme::plurality, Scheme::weighted, Scheme::soft, Scheme::weighted_soft}) {
      const auto a = vote(pm, scheme, w, pm.model_ids);
      const auto b = vote(pm, scheme, w, order);
      CHECK(a.labels == b.labels);
      for (std::size_t s = 0; s < pm.samples(); ++s) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(a.scores[s][c] == doctest::Approx(b.scores[s][c]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("model presets") {
  std::mt19937_64 rng(35);
  auto pm = random_tensor(rng, 5, 2, 2);
  pm.model_ids = {"low", "top", "mid", "top2", "low2"};
  const TierWeights w = {{"low", 1}, {"top", 45}, {"mid", 9}, {"top2", 45}, {"low2", 1}};
  CHECK(resolve_models(pm, "top3", w) == std::vector<std::string>{"top", "top2", "mid"});
  CHECK(resolve_models(pm, "top4", {}) == std::vector<std::string>{"low", "top", "mid", "top2"});
  CHECK(resolve_models(pm, "all", w) == pm.model_ids);
  CHECK(resolve_models(pm, "mid, low", w) == std::vector<std::string>{"mid", "low"});
  CHECK_THROWS_AS(resolve_models(pm, "ghost", w), Error);
  CHECK(scheme_from_string("weighted-soft") == Scheme::weighted_soft);
  CHECK_THROWS_AS(scheme_from_string("borda"), Error);
}

TEST_CASE("prediction matrices round trip") {
  testing::TempDir dir;
  std::mt19937_64 rng(36);
  for (int t = 0; t < 10; ++t) {
    auto pm = random_tensor(rng, 1 + rng() % 4, 1 + rng() % 10, 2 + rng() % 6);
    save_prediction_matrix(pm, dir / "p.csv", t % 2 == 0);
    CHECK(load_prediction_matrix(dir / "p.csv") == pm);
  }
  auto letters = random_tensor(rng, 2, 3, 26);
  letters.alphabet = LabelAlphabet::make(CaseMode::lower);
  save_prediction_matrix(letters, dir / "l.csv");
  CHECK(load_prediction_matrix(dir / "l.csv", CaseMode::lower) == letters);
}

TEST_CASE("row sums are validated on load") {
  testing::TempDir dir;
  auto write = [&](const std::string& body) {
    std::ofstream(dir / "p.csv") << "model_id,sample_id,a,b\n" << body;
    return dir / "p.csv";
  };
  std::vector<std::string> warnings;
  PredictionMatrix pm;
  {
    struct Restore {
      ~Restore() {
        set_log_level(LogLevel::error);
        set_log_sink(nullptr);
      }
    } restore;
    set_log_sink([&](LogLevel, std::string_view, std::string_view msg) { warnings.emplace_back(msg); });
    set_log_level(LogLevel::warn);
    pm = load_prediction_matrix(write("m,s,0.500001,0.5\n"));
  }
  CHECK(pm.tensor[0][0][0] + pm.tensor[0][0][1] == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("renormalized") != std::string::npos);

  CHECK_THROWS_AS(load_prediction_matrix(write("m,s,0.25,0.25\n")), Error);
  CHECK_THROWS_AS(load_prediction_matrix(write("m,s,1.5,-0.5\n")), Error);
  CHECK_THROWS_AS(load_prediction_matrix(write("m,s,0.5,0.5\nm,t,0.5,0.5\nn,s,0.5,0.5\n")), Error);
}

TEST_CASE("weights files") {
  testing::TempDir dir;
  save_weights(default_tier_weights(), dir / "w.csv");
  CHECK(load_weights(dir / "w.csv") == default_tier_weights());
  std::ofstream(dir / "bad.csv") << "model_id,weight\nx,0\n";
  CHECK_THROWS_AS(load_weights(dir / "bad.csv"), Error);
}
