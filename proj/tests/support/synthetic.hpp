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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mts/core.hpp"

namespace mts::testing {

struct SynthOptions {
  std::vector<std::string> classes = {"a", "b", "c"};
  std::vector<double> freq_hz = {2.0, 3.5, 5.0};
  std::size_t per_class = 100;
  std::size_t n_writers = 10;
  std::size_t min_len = 60;
  std::size_t max_len = 100;
  double sampling_hz = 100.0;
  double noise_sd = 0.3;
  std::uint64_t seed = 7;
};

// Class k is a sinusoid at freq_hz[k] on every channel with a random phase
// per channel, additive Gaussian noise and gravity on the z accelerometers.
inline Dataset make_synthetic(const SynthOptions& o = {}) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> amp(0.8, 1.2);
  std::uniform_int_distribution<std::size_t> len(o.min_len, o.max_len);
  std::normal_distribution<double> noise(0.0, o.noise_sd);

  Dataset ds;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < o.per_class; ++i) {
    for (std::size_t k = 0; k < o.classes.size(); ++k) {
      const std::size_t n = len(rng);
      std::vector<Series> ch(kChannels, Series(n));
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double ph = phase(rng);
        const double a = amp(rng);
        const double offset = (c == kAccFrontZ || c == kAccRearZ) ? 9.81 : (c == kForce ? 2.0 : 0.0);
        for (std::size_t t = 0; t < n; ++t) {
          const double tt = static_cast<double>(t) / o.sampling_hz;
          ch[c][t] = offset + a * std::sin(2.0 * M_PI * o.freq_hz[k] * tt + ph) + noise(rng);
        }
      }
      const std::size_t idx = ds.samples.size();
      ds.samples.push_back(Sample::make("s" + std::to_string(idx), o.classes[k],
                                        "w" + std::to_string(idx % o.n_writers), std::move(ch)));
      labels.push_back(o.classes[k]);
    }
  }
  ds.alphabet = infer_alphabet(labels);
  return ds;
}

// Every k-th sample (by position) goes to the test set.
inline std::pair<Dataset, Dataset> split_every(const Dataset& ds, std::size_t k) {
  Dataset train, test;
  train.alphabet = test.alphabet = ds.alphabet;
  test.split.role = Role::test;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (i % k == k - 1 ? test : train).samples.push_back(ds.samples[i]);
  }
  return {train, test};
}

// Random 13-channel sample of the given length, values in [-1, 1].
inline Sample random_sample(std::mt19937_64& rng, std::size_t n, const std::string& id = "r",
                            const std::string& label = "a") {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Series> ch(kChannels, Series(n));
  for (auto& s : ch)
    for (double& v : s) v = u(rng);
  return Sample::make(id, label, std::nullopt, std::move(ch));
}

}  // namespace mts::testing
