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

#include <random>

#include "doctest.h"
#include "mts/parallel.hpp"
#include "mts/pipeline.hpp"
#include "support/leakage.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace mts;
using namespace mts::pipeline;

namespace {

std::pair<Dataset, Dataset> small_split() {
  testing::SynthOptions so;
  so.per_class = 12;
  return testing::split_every(testing::make_synthetic(so), 4);
}

}  // namespace

TEST_CASE("test labels never reach fitted artifacts") {
  const auto [train, test] = small_split();
  auto quantile = Config::defaults(ModelKind::features);
  quantile.n_significant = 1;
  auto nca = quantile;
  nca.scaling = Scaling::nca;
  nca.n_components = 2;
  nca.nca.max_iter = 20;
  auto dtw = Config::defaults(ModelKind::dtw);
  std::mt19937_64 rng(51);
  for (const auto& cfg : {quantile, nca, dtw}) {
    const auto reference = testing::artifact_hashes(train, test, cfg);
    CHECK(reference.count("knn.jsonl") == 1);
    for (int t = 0; t < 3; ++t) {
      CHECK(testing::artifact_hashes(train, testing::scramble_labels(test, rng), cfg) == reference);
    }
  }
}

TEST_CASE("config keys round trip") {
  auto c = Config::defaults(ModelKind::dtw);
  c.name = "custom";
  c.n_significant = 5;
  c.scaling = Scaling::pca;
  c.knn.k = 7;
  c.knn.dtw.band_radius = 12;
  c.knn.dtw.mode = classifiers::DtwMode::independent;
  c.nca_init_jitter = 0.25;
  c.seed = 99;
  const auto back = Config::from_config(c.to_config(), Config{});
  CHECK(back.to_config().entries() == c.to_config().entries());
  CHECK(back.knn.dtw.band_radius == std::optional<std::size_t>(12));
  CHECK(back.seed == 99);
  io::Config bad;
  bad.set("pipeline.scaling", "whiten");
  CHECK_THROWS_AS(Config::from_config(bad, Config{}), Error);
}

TEST_CASE("fitted pipelines survive save and load") {
  const auto [train, test] = small_split();
  testing::TempDir dir;
  auto feat = Config::defaults(ModelKind::features);
  feat.n_significant = 1;
  auto pca = feat;
  pca.scaling = Scaling::pca;
  pca.n_components = 3;
  for (const auto& cfg : {feat, pca, Config::defaults(ModelKind::dtw)}) {
    const auto model = Model::fit(train, cfg);
    model.save(dir / "m");
    const auto back = Model::load(dir / "m");
    CHECK(back.predict(test) == model.predict(test));
    CHECK(back.knn() == model.knn());
    CHECK(back.chain().size() == model.chain().size());
    std::filesystem::remove_all(dir / "m");
  }
  CHECK_THROWS_AS(Model::load(dir / "absent"), Error);
}

TEST_CASE("predictions are probability rows") {
  const auto [train, test] = small_split();
  auto cfg = Config::defaults(ModelKind::features);
  cfg.n_significant = 1;
  const auto r = run(train, test, cfg);
  for (const auto& row : r.predictions.tensor[0]) {
    double sum = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(r.accuracy > 0.8);
}

TEST_CASE("predictions do not depend on the worker count") {
  const auto [train, test] = small_split();
  auto cfg = Config::defaults(ModelKind::features);
  cfg.n_significant = 1;
  cfg.scaling = Scaling::nca;
  cfg.n_components = 2;
  cfg.nca.max_iter = 10;
  const auto before = thread_count();
  set_thread_count(1);
  const auto one = run(train, test, cfg);
  set_thread_count(3);
  const auto three = run(train, test, cfg);
  set_thread_count(before);
  CHECK(one.predictions == three.predictions);
}
