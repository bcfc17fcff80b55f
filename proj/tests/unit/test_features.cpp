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
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "mts/features.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace mts;
using namespace mts::features;

namespace {

Sample with_channel0(const Series& x) {
  std::vector<Series> ch(kChannels, Series(x.size(), 0.0));
  ch[0] = x;
  return Sample::make("s", "a", std::nullopt, ch);
}

double feat(const Series& x, const std::string& descriptor) {
  return extract_single(with_channel0(x), FeatureDescriptor::parse(descriptor));
}

bool close_rel(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("catalog size and uniqueness") {
  const auto per = catalog_for_channel(0);
  const auto all = catalog_default();
  CHECK(per.size() >= 150);
  CHECK(all.size() == kChannels * per.size());
  std::set<std::string> names;
  for (const auto& d : all) names.insert(d.render());
  CHECK(names.size() == all.size());
}

TEST_CASE("descriptor rendering is canonical and parses back") {
  const auto all = catalog_default();
  for (const auto& d : all) CHECK(FeatureDescriptor::parse(d.render()) == d);
  const auto again = catalog_default();
  CHECK(again == all);
  const FeatureDescriptor cq{"change_quantiles", 4, {{"ql", "0.2"}, {"qh", "0.8"}, {"isabs", "true"}, {"agg", "var"}}};
  CHECK(cq.render() == "ch4__change_quantiles__ql_0.2__qh_0.8__isabs_true__agg_var");
  CHECK_THROWS_AS(FeatureDescriptor::parse("bogus"), Error);
}

TEST_CASE("unknown extractor is rejected") {
  CHECK_THROWS_AS(extract_single(with_channel0({1.0, 2.0}), FeatureDescriptor{"nope", 0, {}}), Error);
}

TEST_CASE("closed forms on constructed signals") {
  SUBCASE("constant channel") {
    const Series c(17, -2.75);
    CHECK(feat(c, "ch0__mean") == -2.75);
    CHECK(feat(c, "ch0__variance") == 0.0);
    CHECK(feat(c, "ch0__skewness") == 0.0);
    CHECK(feat(c, "ch0__kurtosis") == 0.0);
    CHECK(feat(c, "ch0__quantile__q_0.3") == -2.75);
  }
  SUBCASE("mean and variance of a ramp") {
    Series x(101);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = 3.0 * static_cast<double>(t) - 7.0;
    // Population variance of 0..n-1 is (n^2 - 1) / 12.
    CHECK(close_rel(feat(x, "ch0__mean"), 3.0 * 50.0 - 7.0));
    CHECK(close_rel(feat(x, "ch0__variance"), 9.0 * (101.0 * 101.0 - 1.0) / 12.0));
    CHECK(close_rel(feat(x, "ch0__standard_deviation"), std::sqrt(9.0 * (101.0 * 101.0 - 1.0) / 12.0)));
    CHECK(close_rel(feat(x, "ch0__mean_change"), 3.0));
    CHECK(close_rel(feat(x, "ch0__mean_abs_change"), 3.0));
  }
  SUBCASE("quantiles interpolate linearly between order statistics") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Series x(37);
    for (double& v : x) v = g(rng);
    Series s = x;
    std::sort(s.begin(), s.end());
    for (double q : {0.1, 0.2, 0.5, 0.7, 0.9}) {
      const double pos = q * 36.0;
      const auto lo = static_cast<std::size_t>(pos);
      const double expect = s[lo] + (s[lo + 1] - s[lo]) * (pos - static_cast<double>(lo));
      CHECK(close_rel(quantile(x, q), expect));
    }
    CHECK(feat(x, "ch0__minimum") == s.front());
    CHECK(feat(x, "ch0__maximum") == s.back());
    CHECK(close_rel(feat(x, "ch0__median"), s[18]));
  }
  SUBCASE("FFT magnitude of a pure tone is N/2") {
    for (std::size_t n : {32u, 50u, 97u}) {
      for (int k : {1, 3, 7}) {
        Series x(n);
        for (std::size_t t = 0; t < n; ++t) x[t] = std::sin(2.0 * M_PI * k * static_cast<double>(t) / n);
        const std::string d = "ch0__fft_coefficient__k_" + std::to_string(k) + "__part_abs";
        CHECK(close_rel(feat(x, d), static_cast<double>(n) / 2.0));
        CHECK(close_rel(feat(x, d), testing::dft_magnitude(x, static_cast<std::size_t>(k))));
      }
    }
  }
  SUBCASE("aggregated linear trend of 2t") {
    Series x(40);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = 2.0 * static_cast<double>(t);
    CHECK(close_rel(feat(x, "ch0__agg_linear_trend__chunk_5__agg_mean__attr_slope"), 10.0));
    // Chunk means are 4, 14, 24, ...: intercept 4, zero residual.
    CHECK(close_rel(feat(x, "ch0__agg_linear_trend__chunk_5__agg_mean__attr_intercept"), 4.0));
    CHECK(std::abs(feat(x, "ch0__agg_linear_trend__chunk_5__agg_mean__attr_stderr")) < 1e-12);
  }
  SUBCASE("counts and strikes") {
    const Series x = {1, 5, 5, 5, 0, 0, 6, 0};
    // mean 2.75
    CHECK(feat(x, "ch0__count_above_mean") == 4.0);
    CHECK(feat(x, "ch0__count_below_mean") == 4.0);
    CHECK(feat(x, "ch0__longest_strike_above_mean") == 3.0);
    CHECK(feat(x, "ch0__longest_strike_below_mean") == 2.0);
    CHECK(feat(x, "ch0__abs_energy") == 1 + 75 + 36);
    CHECK(feat(x, "ch0__number_peaks__support_1") == 1.0);
  }
}

TEST_CASE("degenerate inputs are imputed as zero") {
  CHECK(feat({4.0}, "ch0__variance") == 0.0);
  CHECK(feat({1, 2, 3, 4, 5, 6, 7, 8}, "ch0__autocorrelation__lag_10") == 0.0);
  CHECK(feat({1.0}, "ch0__sample_entropy") == 0.0);
  CHECK(feat({1.0, 2.0}, "ch0__fft_coefficient__k_9__part_abs") == 0.0);
}

TEST_CASE("translation spot checks") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Series x(64);
  for (double& v : x) v = g(rng);
  Series y = x;
  for (double& v : y) v += 12.5;
  CHECK(close_rel(feat(y, "ch0__mean"), feat(x, "ch0__mean") + 12.5, 1e-12));
  CHECK(close_rel(feat(y, "ch0__variance"), feat(x, "ch0__variance"), 1e-9));
  for (int k = 1; k <= 10; ++k) {
    const std::string d = "ch0__fft_coefficient__k_" + std::to_string(k) + "__part_abs";
    CHECK(close_rel(feat(y, d), feat(x, d), 1e-9));
  }
}

TEST_CASE("extraction is total, deterministic and sample-order equivariant") {
  auto ds = testing::make_synthetic({.per_class = 4, .min_len = 3, .max_len = 40});
  const auto cat = catalog_default();
  const auto a = extract(ds, cat);
  const auto b = extract(ds, cat);
  CHECK(a.values == b.values);
  CHECK(a.values.allFinite());
  CHECK(a.cols() == cat.size());

  Dataset rev = ds;
  std::reverse(rev.samples.begin(), rev.samples.end());
  const auto r = extract(rev, cat);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(r.values.row(static_cast<Eigen::Index>(ds.size() - 1 - i)) == a.values.row(static_cast<Eigen::Index>(i)));
    CHECK(r.sample_ids[ds.size() - 1 - i] == a.sample_ids[i]);
  }
  // Column order follows descriptor order.
  std::vector<FeatureDescriptor> swapped = {cat[5], cat[2]};
  const auto s = extract(ds, swapped);
  CHECK(s.values.col(0) == a.values.col(5));
  CHECK(s.values.col(1) == a.values.col(2));
  CHECK_THROWS_AS(extract(ds, {}), Error);
}

TEST_CASE("extract_row agrees with extract") {
  auto ds = testing::make_synthetic({.per_class = 1});
  const auto cat = catalog_default();
  const auto fm = extract(ds, cat);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(extract_row(ds.samples[i], cat) == fm.values.row(static_cast<Eigen::Index>(i)).transpose());
  }
}

TEST_CASE("Ricker wavelet has unit energy") {
  for (double w : {2.0, 5.0, 10.0}) {
    double e = 0.0;
    for (double t = -40.0 * w; t <= 40.0 * w; t += 0.01) e += ricker(t, w) * ricker(t, w) * 0.01;
    CHECK(e == doctest::Approx(1.0).epsilon(1e-6));
  }
}
