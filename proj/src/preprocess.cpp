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

#include "mts/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mts/log.hpp"
#include "mts/parallel.hpp"

namespace mts::preprocess {

void FilterSpec::validate() const {
  if (!(sampling_hz > 0.0)) fail("sampling rate must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sampling_hz / 2.0)) {
    fail("cutoff must lie in (0, sampling_hz / 2)");
  }
  if (order < 1) fail("filter order must be >= 1");
  for (int c : target_channels) {
    if (c < 0 || c >= static_cast<int>(kChannels)) fail("filter target channel out of range");
  }
}

void TrimSpec::validate() const {
  if (min_len == 0 || min_len > max_len) fail("trim spec requires 0 < min_len <= max_len");
}

std::vector<Biquad> butterworth_highpass(const FilterSpec& spec) {
  spec.validate();
  const double w = std::tan(std::numbers::pi * spec.cutoff_hz / spec.sampling_hz);
  const int n = spec.order;
  std::vector<Biquad> sections;
  // Conjugate pole pairs of the analog prototype, then the real pole.
  for (int k = 1; k <= n / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n - 1) / (2.0 * n);
    const double inv_q = -2.0 * std::cos(theta);
    const double a0 = 1.0 + w * inv_q + w * w;
    Biquad s;
    s.b = {1.0 / a0, -2.0 / a0, 1.0 / a0};
    s.a = {1.0, (2.0 * w * w - 2.0) / a0, (1.0 - w * inv_q + w * w) / a0};
    sections.push_back(s);
  }
  if (n % 2 == 1) {
    const double a0 = 1.0 + w;
    Biquad s;
    s.b = {1.0 / a0, -1.0 / a0, 0.0};
    s.a = {1.0, (w - 1.0) / a0, 0.0};
    sections.push_back(s);
  }
  return sections;
}

namespace {

using State = std::array<double, 2>;

State steady_state(const Biquad& s) {
  const double gain = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
  const double z2 = s.b[2] - s.a[2] * gain;
  const double z1 = s.b[1] - s.a[1] * gain + z2;
  return {z1, z2};
}

double dc_gain(const Biquad& s) {
  return (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
}

void run_sections(const std::vector<Biquad>& sections, Series& x) {
  const double x0 = x.front();
  double scale = 1.0;
  for (const auto& s : sections) {
    State z = steady_state(s);
    z[0] *= scale * x0;
    z[1] *= scale * x0;
    for (double& v : x) {
      const double in = v;
      const double y = s.b[0] * in + z[0];
      z[0] = s.b[1] * in - s.a[1] * y + z[1];
      z[1] = s.b[2] * in - s.a[2] * y;
      v = y;
    }
    scale *= dc_gain(s);
  }
}

// Samples until the slowest pole has decayed by 1e-7, so that the start-up
// transient dies out inside the padding.
std::size_t settle_length(const std::vector<Biquad>& sections) {
  double radius = 0.0;
  for (const auto& s : sections) {
    const double disc = s.a[1] * s.a[1] - 4.0 * s.a[2];
    if (disc < 0.0) {
      radius = std::max(radius, std::sqrt(s.a[2]));
    } else {
      const double r = std::sqrt(disc);
      radius = std::max({radius, std::abs(-s.a[1] + r) / 2.0, std::abs(-s.a[1] - r) / 2.0});
    }
  }
  if (!(radius > 0.0)) return 0;
  if (radius >= 1.0) return 100000;
  return static_cast<std::size_t>(std::min(100000.0, std::ceil(std::log(1e-7) / std::log(radius))));
}

}  // namespace

Series filtfilt(const std::vector<Biquad>& sections, const Series& x) {
  if (x.size() < 2 || sections.empty()) return x;
  const std::size_t n = x.size();
  const std::size_t pad = std::max<std::size_t>(9, settle_length(sections));
  // Mirror extension, repeated as often as needed (period 2n - 2).
  const auto period = static_cast<std::ptrdiff_t>(2 * n - 2);
  auto at = [&](std::ptrdiff_t i) {
    std::ptrdiff_t k = ((i % period) + period) % period;
    if (k >= static_cast<std::ptrdiff_t>(n)) k = period - k;
    return x[static_cast<std::size_t>(k)];
  };
  Series ext(n + 2 * pad);
  for (std::size_t i = 0; i < ext.size(); ++i) {
    ext[i] = at(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(pad));
  }
  run_sections(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_sections(sections, ext);
  std::reverse(ext.begin(), ext.end());
  return Series(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

Sample highpass(const Sample& sample, const FilterSpec& spec) {
  const auto sections = butterworth_highpass(spec);
  if (sample.length() < static_cast<std::size_t>(3 * spec.order)) {
    log_warn("preprocess", "sample " + sample.id + " shorter than 3*order; high-pass skipped");
    return sample;
  }
  Sample out = sample;
  for (int c : spec.target_channels) {
    auto& ch = out.channels[static_cast<std::size_t>(c)];
    ch = filtfilt(sections, ch);
  }
  return out;
}

Series moving_average(const Series& x, int window) {
  if (window < 1 || window % 2 == 0) fail("moving-average window must be odd and >= 1");
  const std::ptrdiff_t half = window / 2;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  Series out(x.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, t + half);
    double sum = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) sum += x[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(t)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Sample moving_average(const Sample& sample, int window) {
  Sample out = sample;
  for (auto& ch : out.channels) ch = moving_average(ch, window);
  return out;
}

TrimResult trim_outliers(const Dataset& ds, const TrimSpec& spec) {
  spec.validate();
  TrimResult r;
  r.retained.alphabet = ds.alphabet;
  r.retained.split = ds.split;
  for (const auto& s : ds.samples) {
    const std::size_t len = s.length();
    if (len > spec.max_len) {
      r.discarded.push_back({s.id, len, "length " + std::to_string(len) + " > max_len " +
                                            std::to_string(spec.max_len)});
    } else if (len < spec.min_len) {
      r.discarded.push_back({s.id, len, "length " + std::to_string(len) + " < min_len " +
                                            std::to_string(spec.min_len)});
    } else {
      r.retained.samples.push_back(s);
    }
  }
  return r;
}

TrimSpec derive_trim_spec(const SubsetStats& stats, double k_sigma, std::size_t min_len) {
  if (stats.n < 1 || stats.sigma < 0.0) fail("invalid subset stats");
  const double bound = std::round(stats.mu + k_sigma * stats.sigma);
  if (bound < 1.0) fail("derived max_len is below 1");
  TrimSpec spec;
  spec.max_len = static_cast<std::size_t>(bound);
  spec.min_len = min_len;
  return spec;
}

TrimResult run(const Dataset& ds, const Options& opts) {
  TrimResult r;
  if (opts.apply_trim) {
    TrimSpec spec = opts.trim;
    if (opts.auto_trim_k > 0.0) {
      spec = derive_trim_spec(compute_subset_stats(ds), opts.auto_trim_k, opts.trim.min_len);
    }
    r = trim_outliers(ds, spec);
  } else {
    r.retained = ds;
  }
  if (opts.apply_highpass) opts.filter.validate();
  auto& samples = r.retained.samples;
  parallel_for(samples.size(), [&](std::size_t i) {
    Sample s = samples[i];
    if (opts.apply_highpass) s = highpass(s, opts.filter);
    if (opts.window > 1) s = moving_average(s, opts.window);
    samples[i] = std::move(s);
  });
  return r;
}

}  // namespace mts::preprocess
