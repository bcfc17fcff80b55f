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

#include "mts/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <optional>

#include "mts/parallel.hpp"

namespace mts::features {

namespace {

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

enum class Kind {
  mean, variance, standard_deviation, median, minimum, maximum, abs_energy,
  mean_abs_change, mean_change, count_above_mean, count_below_mean, skewness, kurtosis,
  longest_strike_above_mean, longest_strike_below_mean, autocorrelation, quantile,
  change_quantiles, fft_coefficient, agg_linear_trend, cwt_coefficients, sample_entropy,
  number_peaks, index_mass_quantile,
};

struct KindName {
  Kind kind;
  std::string_view name;
};

constexpr KindName kKinds[] = {
    {Kind::mean, "mean"},
    {Kind::variance, "variance"},
    {Kind::standard_deviation, "standard_deviation"},
    {Kind::median, "median"},
    {Kind::minimum, "minimum"},
    {Kind::maximum, "maximum"},
    {Kind::abs_energy, "abs_energy"},
    {Kind::mean_abs_change, "mean_abs_change"},
    {Kind::mean_change, "mean_change"},
    {Kind::count_above_mean, "count_above_mean"},
    {Kind::count_below_mean, "count_below_mean"},
    {Kind::skewness, "skewness"},
    {Kind::kurtosis, "kurtosis"},
    {Kind::longest_strike_above_mean, "longest_strike_above_mean"},
    {Kind::longest_strike_below_mean, "longest_strike_below_mean"},
    {Kind::autocorrelation, "autocorrelation"},
    {Kind::quantile, "quantile"},
    {Kind::change_quantiles, "change_quantiles"},
    {Kind::fft_coefficient, "fft_coefficient"},
    {Kind::agg_linear_trend, "agg_linear_trend"},
    {Kind::cwt_coefficients, "cwt_coefficients"},
    {Kind::sample_entropy, "sample_entropy"},
    {Kind::number_peaks, "number_peaks"},
    {Kind::index_mass_quantile, "index_mass_quantile"},
};

std::optional<Kind> kind_from_name(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

/// Descriptor lowered to numbers so the inner loop does no string work.
struct Compiled {
  int channel = 0;
  Kind kind = Kind::mean;
  double r1 = 0.0;  // lag / q / ql / width
  double r2 = 0.0;  // qh
  int i1 = 0;       // fft bin, chunk length, coefficient, support
  bool flag = false;  // isabs / angle
  int agg = 0;        // 0 mean, 1 var
  int attr = 0;       // 0 slope, 1 intercept, 2 stderr
};

const std::string& param(const FeatureDescriptor& d, std::string_view key) {
  for (const auto& [k, v] : d.params) {
    if (k == key) return v;
  }
  fail("descriptor " + d.render() + " lacks parameter '" + std::string(key) + "'");
}

double param_real(const FeatureDescriptor& d, std::string_view key) {
  const std::string& v = param(d, key);
  try {
    return io::parse_double(v);
  } catch (const Error&) {
    fail("descriptor " + d.render() + ": bad value for '" + std::string(key) + "'");
  }
}

int param_int(const FeatureDescriptor& d, std::string_view key) {
  const double v = param_real(d, key);
  if (v != std::floor(v)) fail("descriptor " + d.render() + ": '" + std::string(key) + "' must be an integer");
  return static_cast<int>(v);
}

Compiled compile(const FeatureDescriptor& d) {
  auto kind = kind_from_name(d.extractor);
  if (!kind) fail("unknown extractor '" + d.extractor + "'");
  if (d.channel < 0 || d.channel >= static_cast<int>(kChannels)) {
    fail("descriptor " + d.render() + ": channel out of range");
  }
  Compiled c;
  c.channel = d.channel;
  c.kind = *kind;
  switch (c.kind) {
    case Kind::autocorrelation: c.i1 = param_int(d, "lag"); break;
    case Kind::quantile:
    case Kind::index_mass_quantile: c.r1 = param_real(d, "q"); break;
    case Kind::change_quantiles: {
      c.r1 = param_real(d, "ql");
      c.r2 = param_real(d, "qh");
      const auto& abs = param(d, "isabs");
      if (abs != "true" && abs != "false") fail("descriptor " + d.render() + ": isabs must be true/false");
      c.flag = abs == "true";
      const auto& agg = param(d, "agg");
      if (agg != "mean" && agg != "var") fail("descriptor " + d.render() + ": agg must be mean/var");
      c.agg = agg == "var";
      break;
    }
    case Kind::fft_coefficient: {
      c.i1 = param_int(d, "k");
      const auto& part = param(d, "part");
      if (part != "abs" && part != "angle") fail("descriptor " + d.render() + ": part must be abs/angle");
      c.flag = part == "angle";
      break;
    }
    case Kind::agg_linear_trend: {
      c.i1 = param_int(d, "chunk");
      if (c.i1 < 1) fail("descriptor " + d.render() + ": chunk must be >= 1");
      const auto& agg = param(d, "agg");
      if (agg != "mean" && agg != "var") fail("descriptor " + d.render() + ": agg must be mean/var");
      c.agg = agg == "var";
      const auto& attr = param(d, "attr");
      if (attr == "slope") c.attr = 0;
      else if (attr == "intercept") c.attr = 1;
      else if (attr == "stderr") c.attr = 2;
      else fail("descriptor " + d.render() + ": attr must be slope/intercept/stderr");
      break;
    }
    case Kind::cwt_coefficients:
      c.r1 = param_real(d, "width");
      c.i1 = param_int(d, "coeff");
      if (c.r1 <= 0) fail("descriptor " + d.render() + ": width must be positive");
      break;
    case Kind::number_peaks: c.i1 = param_int(d, "support"); break;
    default: break;
  }
  return c;
}

std::vector<Compiled> compile_all(const std::vector<FeatureDescriptor>& ds) {
  std::vector<Compiled> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(compile(d));
  return out;
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

/// Caches quantities shared by several extractors of one channel.
class SeriesContext {
 public:
  explicit SeriesContext(const Series& x) : x_(x), n_(x.size()) {
    mean_ = mean_of(x_);
    double m2 = 0.0;
    for (double v : x_) m2 += (v - mean_) * (v - mean_);
    var_ = m2 / static_cast<double>(n_);
  }

  const Series& x() const { return x_; }
  std::size_t n() const { return n_; }
  double mean() const { return mean_; }
  double var() const { return var_; }

  const std::vector<double>& sorted() {
    if (sorted_.empty()) {
      sorted_ = x_;
      std::sort(sorted_.begin(), sorted_.end());
    }
    return sorted_;
  }

  double quantile(double q) {
    const auto& s = sorted();
    const double pos = q * static_cast<double>(n_ - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n_ - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] + (s[hi] - s[lo]) * frac;
  }

  std::complex<double> dft(int k) {
    auto it = std::find_if(dft_cache_.begin(), dft_cache_.end(),
                           [k](const auto& p) { return p.first == k; });
    if (it != dft_cache_.end()) return it->second;
    std::complex<double> acc{0.0, 0.0};
    const double step = -2.0 * std::numbers::pi * k / static_cast<double>(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      const double ang = step * static_cast<double>(t);
      acc += x_[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    dft_cache_.emplace_back(k, acc);
    return acc;
  }

 private:
  const Series& x_;
  std::size_t n_;
  double mean_ = 0.0;
  double var_ = 0.0;
  std::vector<double> sorted_;
  std::vector<std::pair<int, std::complex<double>>> dft_cache_;
};

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

double longest_strike(const Series& x, double mean, bool above) {
  std::size_t best = 0;
  std::size_t run = 0;
  for (double v : x) {
    const bool hit = above ? v > mean : v < mean;
    run = hit ? run + 1 : 0;
    best = std::max(best, run);
  }
  return static_cast<double>(best);
}

double change_quantiles(SeriesContext& ctx, const Compiled& c) {
  if (c.r1 >= c.r2 || ctx.n() < 2) return 0.0;
  const double lo = ctx.quantile(c.r1);
  const double hi = ctx.quantile(c.r2);
  const auto& x = ctx.x();
  std::vector<double> diffs;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const bool in_prev = x[t - 1] >= lo && x[t - 1] <= hi;
    const bool in_cur = x[t] >= lo && x[t] <= hi;
    if (in_prev && in_cur) {
      const double d = x[t] - x[t - 1];
      diffs.push_back(c.flag ? std::abs(d) : d);
    }
  }
  if (diffs.empty()) return 0.0;
  return c.agg == 0 ? mean_of(diffs) : var_of(diffs);
}

double agg_linear_trend(const Series& x, const Compiled& c) {
  const auto chunk = static_cast<std::size_t>(c.i1);
  std::vector<double> agg;
  for (std::size_t start = 0; start < x.size(); start += chunk) {
    const std::size_t end = std::min(x.size(), start + chunk);
    std::vector<double> part(x.begin() + static_cast<std::ptrdiff_t>(start),
                             x.begin() + static_cast<std::ptrdiff_t>(end));
    agg.push_back(c.agg == 0 ? mean_of(part) : var_of(part));
  }
  const std::size_t m = agg.size();
  if (m < 2) return 0.0;
  const double xm = static_cast<double>(m - 1) / 2.0;
  const double ym = mean_of(agg);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = static_cast<double>(i) - xm;
    sxx += dx * dx;
    sxy += dx * (agg[i] - ym);
  }
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  if (c.attr == 0) return slope;
  if (c.attr == 1) return intercept;
  if (m < 3) return 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = agg[i] - (intercept + slope * static_cast<double>(i));
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(m - 2) / sxx);
}

double cwt_coefficient(const Series& x, double width, int coeff) {
  const std::size_t n = x.size();
  if (coeff < 0 || static_cast<std::size_t>(coeff) >= n) return 0.0;
  const std::size_t points = std::min(static_cast<std::size_t>(10.0 * width), n);
  if (points == 0) return 0.0;
  const double center = (static_cast<double>(points) - 1.0) / 2.0;
  const auto offset = static_cast<std::ptrdiff_t>((points - 1) / 2);
  double acc = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    const double w = ricker(static_cast<double>(j) - center, width);
    const std::ptrdiff_t idx = coeff + offset - static_cast<std::ptrdiff_t>(j);
    acc += x[reflect_index(idx, n)] * w;
  }
  return acc;
}

double sample_entropy(const SeriesContext& ctx) {
  constexpr std::size_t m = 2;
  const auto& x = ctx.x();
  const std::size_t n = x.size();
  if (n <= m + 1) return 0.0;
  const double r = 0.2 * std::sqrt(ctx.var());
  const std::size_t templates = n - m;
  double b = 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < templates; ++i) {
    for (std::size_t j = i + 1; j < templates; ++j) {
      bool match = true;
      for (std::size_t k = 0; k < m && match; ++k) match = std::abs(x[i + k] - x[j + k]) <= r;
      if (!match) continue;
      b += 1.0;
      if (j + m < n && i + m < n && std::abs(x[i + m] - x[j + m]) <= r) a += 1.0;
    }
  }
  if (a == 0.0 || b == 0.0) return 0.0;
  return -std::log(a / b);
}

double number_peaks(const Series& x, int support) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t s = support;
  double count = 0.0;
  for (std::ptrdiff_t i = s; i < n - s; ++i) {
    bool peak = true;
    for (std::ptrdiff_t k = 1; k <= s && peak; ++k) {
      peak = x[static_cast<std::size_t>(i)] > x[static_cast<std::size_t>(i - k)] &&
             x[static_cast<std::size_t>(i)] > x[static_cast<std::size_t>(i + k)];
    }
    if (peak) count += 1.0;
  }
  return count;
}

double index_mass_quantile(const Series& x, double q) {
  double total = 0.0;
  for (double v : x) total += std::abs(v);
  if (total == 0.0) return 0.0;
  double cum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cum += std::abs(x[i]);
    if (cum / total >= q) return static_cast<double>(i + 1) / static_cast<double>(x.size());
  }
  return 1.0;
}

double evaluate(SeriesContext& ctx, const Compiled& c) {
  const auto& x = ctx.x();
  const std::size_t n = ctx.n();
  const double nd = static_cast<double>(n);
  switch (c.kind) {
    case Kind::mean: return ctx.mean();
    case Kind::variance: return ctx.var();
    case Kind::standard_deviation: return std::sqrt(ctx.var());
    case Kind::median: return ctx.quantile(0.5);
    case Kind::minimum: return ctx.sorted().front();
    case Kind::maximum: return ctx.sorted().back();
    case Kind::abs_energy: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s;
    }
    case Kind::mean_abs_change: {
      if (n < 2) return 0.0;
      double s = 0.0;
      for (std::size_t t = 1; t < n; ++t) s += std::abs(x[t] - x[t - 1]);
      return s / (nd - 1.0);
    }
    case Kind::mean_change: return n < 2 ? 0.0 : (x.back() - x.front()) / (nd - 1.0);
    case Kind::count_above_mean:
      return static_cast<double>(std::count_if(x.begin(), x.end(), [&](double v) { return v > ctx.mean(); }));
    case Kind::count_below_mean:
      return static_cast<double>(std::count_if(x.begin(), x.end(), [&](double v) { return v < ctx.mean(); }));
    case Kind::skewness: {
      if (n < 3 || ctx.var() == 0.0) return 0.0;
      double m3 = 0.0;
      for (double v : x) m3 += std::pow(v - ctx.mean(), 3);
      m3 /= nd;
      return std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * m3 / std::pow(ctx.var(), 1.5);
    }
    case Kind::kurtosis: {
      if (n < 4 || ctx.var() == 0.0) return 0.0;
      double m4 = 0.0;
      for (double v : x) m4 += std::pow(v - ctx.mean(), 4);
      m4 /= nd;
      const double g2 = m4 / (ctx.var() * ctx.var()) - 3.0;
      return ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
    }
    case Kind::longest_strike_above_mean: return longest_strike(x, ctx.mean(), true);
    case Kind::longest_strike_below_mean: return longest_strike(x, ctx.mean(), false);
    case Kind::autocorrelation: {
      const auto lag = static_cast<std::size_t>(c.i1);
      if (n <= lag || ctx.var() == 0.0) return 0.0;
      double s = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - ctx.mean()) * (x[t + lag] - ctx.mean());
      return s / (static_cast<double>(n - lag) * ctx.var());
    }
    case Kind::quantile: return ctx.quantile(c.r1);
    case Kind::change_quantiles: return change_quantiles(ctx, c);
    case Kind::fft_coefficient: {
      if (c.i1 < 0 || static_cast<std::size_t>(c.i1) > n / 2) return 0.0;
      const auto z = ctx.dft(c.i1);
      return c.flag ? std::arg(z) * 180.0 / std::numbers::pi : std::abs(z);
    }
    case Kind::agg_linear_trend: return agg_linear_trend(x, c);
    case Kind::cwt_coefficients: return cwt_coefficient(x, c.r1, c.i1);
    case Kind::sample_entropy: return sample_entropy(ctx);
    case Kind::number_peaks: return number_peaks(x, c.i1);
    case Kind::index_mass_quantile: return index_mass_quantile(x, c.r1);
  }
  return 0.0;
}

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

void extract_into(const Sample& sample, const std::vector<Compiled>& compiled, double* out,
                  std::ptrdiff_t stride) {
  if (sample.channels.size() != kChannels) fail("sample " + sample.id + ": expected 13 channels");
  if (sample.length() == 0) fail("sample " + sample.id + ": empty channel");
  std::vector<std::optional<SeriesContext>> contexts(kChannels);
  for (std::size_t j = 0; j < compiled.size(); ++j) {
    const auto ch = static_cast<std::size_t>(compiled[j].channel);
    if (!contexts[ch]) contexts[ch].emplace(sample.channels[ch]);
    out[static_cast<std::ptrdiff_t>(j) * stride] = finite_or_zero(evaluate(*contexts[ch], compiled[j]));
  }
}

}  // namespace

std::string FeatureDescriptor::render() const {
  std::string s = "ch" + std::to_string(channel) + "__" + extractor;
  for (const auto& [k, v] : params) s += "__" + k + "_" + v;
  return s;
}

FeatureDescriptor FeatureDescriptor::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find("__", start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 2;
  }
  const std::string src(text);
  if (parts.size() < 2 || parts[0].size() < 3 || parts[0].substr(0, 2) != "ch") {
    fail("malformed feature descriptor '" + src + "'");
  }
  FeatureDescriptor d;
  try {
    std::size_t used = 0;
    d.channel = std::stoi(parts[0].substr(2), &used);
    if (used != parts[0].size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail("malformed channel in feature descriptor '" + src + "'");
  }
  d.extractor = parts[1];
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const auto us = parts[i].find('_');
    if (us == std::string::npos || us == 0) fail("malformed parameter in '" + src + "'");
    d.params.emplace_back(parts[i].substr(0, us), parts[i].substr(us + 1));
  }
  return d;
}

std::vector<FeatureDescriptor> catalog_for_channel(int channel) {
  std::vector<FeatureDescriptor> out;
  auto add = [&](std::string name, std::vector<std::pair<std::string, std::string>> params = {}) {
    out.push_back(FeatureDescriptor{std::move(name), channel, std::move(params)});
  };
  for (const char* name :
       {"mean", "variance", "standard_deviation", "median", "minimum", "maximum", "abs_energy",
        "mean_abs_change", "mean_change", "count_above_mean", "count_below_mean", "skewness",
        "kurtosis", "longest_strike_above_mean", "longest_strike_below_mean"}) {
    add(name);
  }
  for (int lag : {1, 2, 3, 5, 10}) add("autocorrelation", {{"lag", std::to_string(lag)}});
  for (int i = 1; i <= 9; ++i) add("quantile", {{"q", fmt_real(i / 10.0)}});
  for (int lo = 0; lo <= 4; ++lo) {
    for (int hi = 6; hi <= 10; ++hi) {
      for (const char* isabs : {"false", "true"}) {
        for (const char* agg : {"mean", "var"}) {
          add("change_quantiles", {{"ql", fmt_real(lo / 10.0)},
                                   {"qh", fmt_real(hi / 10.0)},
                                   {"isabs", isabs},
                                   {"agg", agg}});
        }
      }
    }
  }
  for (const char* part : {"abs", "angle"}) {
    for (int k = 0; k <= 10; ++k) add("fft_coefficient", {{"k", std::to_string(k)}, {"part", part}});
  }
  for (int chunk : {5, 10, 50}) {
    for (const char* agg : {"mean", "var"}) {
      for (const char* attr : {"slope", "intercept", "stderr"}) {
        add("agg_linear_trend", {{"chunk", std::to_string(chunk)}, {"agg", agg}, {"attr", attr}});
      }
    }
  }
  for (int width : {2, 5, 10, 20}) {
    for (int coeff = 0; coeff <= 4; ++coeff) {
      add("cwt_coefficients", {{"width", std::to_string(width)}, {"coeff", std::to_string(coeff)}});
    }
  }
  add("sample_entropy");
  for (int support : {1, 3, 5}) add("number_peaks", {{"support", std::to_string(support)}});
  for (double q : {0.25, 0.5, 0.75}) add("index_mass_quantile", {{"q", fmt_real(q)}});
  return out;
}

std::vector<FeatureDescriptor> catalog_default() {
  std::vector<FeatureDescriptor> out;
  for (int c = 0; c < static_cast<int>(kChannels); ++c) {
    auto part = catalog_for_channel(c);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) fail("quantile of empty series");
  SeriesContext ctx(x);
  return ctx.quantile(q);
}

double ricker(double t, double width) {
  const double a = 2.0 / (std::sqrt(3.0 * width) * std::pow(std::numbers::pi, 0.25));
  const double r = t / width;
  return a * (1.0 - r * r) * std::exp(-0.5 * r * r);
}

double extract_single(const Sample& sample, const FeatureDescriptor& descriptor) {
  const std::vector<Compiled> compiled{compile(descriptor)};
  double out = 0.0;
  extract_into(sample, compiled, &out, 1);
  return out;
}

Eigen::VectorXd extract_row(const Sample& sample, const std::vector<FeatureDescriptor>& descriptors) {
  const auto compiled = compile_all(descriptors);
  Eigen::VectorXd row(static_cast<Eigen::Index>(descriptors.size()));
  extract_into(sample, compiled, row.data(), 1);
  return row;
}

FeatureMatrix extract(const Dataset& ds, const std::vector<FeatureDescriptor>& descriptors) {
  if (descriptors.empty()) fail("no descriptors to extract");
  const auto compiled = compile_all(descriptors);
  FeatureMatrix fm;
  fm.columns.reserve(descriptors.size());
  for (const auto& d : descriptors) fm.columns.push_back(d.render());
  fm.values.resize(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(descriptors.size()));
  for (const auto& s : ds.samples) {
    fm.sample_ids.push_back(s.id);
    fm.labels.push_back(s.label);
  }
  // Column-major storage: row i starts at data() + i with stride rows().
  parallel_for(ds.size(), [&](std::size_t i) {
    extract_into(ds.samples[i], compiled, fm.values.data() + i, fm.values.rows());
  });
  return fm;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& idx) const {
  FeatureMatrix out;
  out.columns = columns;
  out.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(idx[r]));
    out.sample_ids.push_back(sample_ids[idx[r]]);
    out.labels.push_back(labels[idx[r]]);
  }
  return out;
}

io::Table FeatureMatrix::to_table() const {
  io::Table t;
  t.key_names = {"sample_id", "label"};
  t.value_names = columns;
  for (std::size_t r = 0; r < rows(); ++r) {
    std::vector<double> row(cols());
    for (std::size_t c = 0; c < cols(); ++c) {
      row[c] = values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    t.add_row({sample_ids[r], labels[r]}, std::move(row));
  }
  return t;
}

FeatureMatrix FeatureMatrix::from_table(const io::Table& t) {
  if (t.key_names.size() != 2 || t.key_names[0] != "sample_id" || t.key_names[1] != "label") {
    fail("feature matrix must start with sample_id,label columns");
  }
  FeatureMatrix fm;
  fm.columns = t.value_names;
  fm.values.resize(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.value_names.size()));
  for (std::size_t r = 0; r < t.rows(); ++r) {
    fm.sample_ids.push_back(t.keys[r][0]);
    fm.labels.push_back(t.keys[r][1]);
    for (std::size_t c = 0; c < t.value_names.size(); ++c) {
      fm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.values[r][c];
    }
  }
  return fm;
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  return FeatureMatrix::from_table(io::read_table(path, 2));
}

void write_feature_matrix(const FeatureMatrix& fm, const std::filesystem::path& path) {
  io::write_table(fm.to_table(), path);
}

}  // namespace mts::features
