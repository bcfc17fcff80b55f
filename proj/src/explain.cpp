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

#include "mts/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mts/parallel.hpp"

namespace mts::explain {

SliceGrid make_slice_grid(std::size_t length, std::size_t n_slices) {
  if (n_slices < 1) fail("n_slices must be >= 1");
  if (length < n_slices) {
    fail("length " + std::to_string(length) + " is shorter than " + std::to_string(n_slices) + " slices");
  }
  SliceGrid g;
  g.length = length;
  const std::size_t base = length / n_slices;
  const std::size_t extra = length % n_slices;
  g.bounds.push_back(0);
  for (std::size_t i = 0; i < n_slices; ++i) g.bounds.push_back(g.bounds.back() + base + (i < extra ? 1 : 0));
  return g;
}

std::string_view to_string(Replacement r) {
  switch (r) {
    case Replacement::mean: return "mean";
    case Replacement::zero: return "zero";
    case Replacement::noise: return "noise";
  }
  return "mean";
}

Replacement replacement_from_string(std::string_view text) {
  for (auto r : {Replacement::mean, Replacement::zero, Replacement::noise}) {
    if (to_string(r) == text) return r;
  }
  fail("unknown replacement '" + std::string(text) + "'");
}

namespace {

std::vector<double> checked(const Predictor& model, const Sample& s, std::size_t n_classes) {
  std::vector<double> p = model(s);
  if (p.size() != n_classes) fail("model returned invalid probabilities: wrong class count");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) fail("model returned invalid probabilities");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) fail("model returned invalid probabilities: sum " + io::format_double(sum));
  return p;
}

}  // namespace

Report explain(const Sample& sample, const Predictor& model, const std::array<double, kChannels>& channel_means,
               const LabelAlphabet& alphabet, const Options& opts) {
  if (opts.n_perturbations < 2) fail("n_perturbations must be >= 2");
  if (!(opts.kernel_width > 0.0)) fail("kernel width must be positive");
  if (!(opts.ridge >= 0.0)) fail("ridge penalty must be non-negative");
  if (sample.channels.size() != kChannels) fail("sample " + sample.id + ": expected 13 channels");
  const SliceGrid grid = make_slice_grid(sample.length(), opts.n_slices);
  const std::size_t segments = kChannels * opts.n_slices;

  Report report;
  report.sample_id = sample.id;
  report.n_slices = opts.n_slices;
  report.options = opts;
  const auto base = checked(model, sample, alphabet.size());
  report.predicted_class =
      static_cast<std::size_t>(std::max_element(base.begin(), base.end()) - base.begin());
  report.predicted_label = alphabet[report.predicted_class];
  report.base_probability = base[report.predicted_class];

  // Masks and replacement noise are drawn up front on one generator so the
  // result does not depend on the worker count.
  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(opts.n_perturbations),
                                            static_cast<Eigen::Index>(segments));
  for (Eigen::Index r = 1; r < Z.rows(); ++r) {
    for (Eigen::Index c = 0; c < Z.cols(); ++c) Z(r, c) = (rng() >> 63) ? 1.0 : 0.0;
  }
  std::vector<Series> noise;
  if (opts.replacement == Replacement::noise) {
    std::normal_distribution<double> gauss(0.0, opts.noise_sd);
    noise.resize(kChannels, Series(sample.length()));
    for (std::size_t c = 0; c < kChannels; ++c) {
      for (double& v : noise[c]) v = channel_means[c] + gauss(rng);
    }
  }

  Eigen::VectorXd y(Z.rows());
  parallel_for(static_cast<std::size_t>(Z.rows()), [&](std::size_t r) {
    Sample s = sample;
    for (std::size_t c = 0; c < kChannels; ++c) {
      for (std::size_t k = 0; k < opts.n_slices; ++k) {
        if (Z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c * opts.n_slices + k)) != 0.0) continue;
        for (std::size_t t = grid.begin(k); t < grid.end(k); ++t) {
          switch (opts.replacement) {
            case Replacement::mean: s.channels[c][t] = channel_means[c]; break;
            case Replacement::zero: s.channels[c][t] = 0.0; break;
            case Replacement::noise: s.channels[c][t] = noise[c][t]; break;
          }
        }
      }
    }
    y(static_cast<Eigen::Index>(r)) = checked(model, s, alphabet.size())[report.predicted_class];
  });

  // Weighted ridge regression with a weighted-mean intercept.
  Eigen::VectorXd w(Z.rows());
  for (Eigen::Index r = 0; r < Z.rows(); ++r) {
    const double d = 1.0 - Z.row(r).sum() / static_cast<double>(segments);
    w(r) = std::exp(-(d * d) / (opts.kernel_width * opts.kernel_width));
  }
  const double wsum = w.sum();
  const Eigen::RowVectorXd zbar = (w.transpose() * Z) / wsum;
  const double ybar = w.dot(y) / wsum;
  const Eigen::MatrixXd Zc = Z.rowwise() - zbar;
  const Eigen::VectorXd yc = y.array() - ybar;
  Eigen::MatrixXd G = Zc.transpose() * w.asDiagonal() * Zc;
  G.diagonal().array() += opts.ridge;
  const Eigen::VectorXd beta = G.ldlt().solve(Zc.transpose() * (w.asDiagonal() * yc));
  report.intercept = ybar - zbar.dot(beta);

  std::vector<std::size_t> order(segments);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(beta(static_cast<Eigen::Index>(a))) > std::abs(beta(static_cast<Eigen::Index>(b)));
  });
  const std::size_t keep = std::min(opts.top_k, segments);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = order[i];
    report.entries.push_back({static_cast<int>(j / opts.n_slices), j % opts.n_slices,
                              beta(static_cast<Eigen::Index>(j))});
  }
  return report;
}

Overlay render_overlay(const Report& report, std::size_t n_slices) {
  if (report.n_slices != n_slices) {
    fail("report has " + std::to_string(report.n_slices) + " slices, grid has " + std::to_string(n_slices));
  }
  const auto rows = static_cast<Eigen::Index>(kChannels);
  const auto cols = static_cast<Eigen::Index>(n_slices);
  Overlay o{Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols)};
  for (const auto& e : report.entries) {
    if (e.channel < 0 || e.channel >= static_cast<int>(kChannels) || e.slice >= n_slices) {
      fail("report entry outside the slice grid");
    }
    const auto r = static_cast<Eigen::Index>(e.channel);
    const auto c = static_cast<Eigen::Index>(e.slice);
    o.weights(r, c) = e.weight;
    if (e.weight > 0.0) o.positive(r, c) = e.weight;
    if (e.weight < 0.0) o.negative(r, c) = -e.weight;
  }
  return o;
}

io::Table to_table(const Report& report) {
  io::Table t;
  const auto& o = report.options;
  t.preamble = {
      "model=" + report.model_id + " sample=" + report.sample_id + " predicted=" + report.predicted_label +
          " p=" + io::format_double(report.base_probability),
      "slices=" + std::to_string(o.n_slices) + " perturbations=" + std::to_string(o.n_perturbations) +
          " seed=" + std::to_string(o.seed) + " kernel_width=" + io::format_double(o.kernel_width) +
          " ridge=" + io::format_double(o.ridge) + " replacement=" + std::string(to_string(o.replacement)) +
          " intercept=" + io::format_double(report.intercept),
  };
  t.key_names = {"channel_name"};
  t.value_names = {"channel", "slice", "weight"};
  for (const auto& e : report.entries) {
    t.add_row({std::string(channel_name(e.channel))},
              {static_cast<double>(e.channel), static_cast<double>(e.slice), e.weight});
  }
  return t;
}

io::Table to_table(const Eigen::MatrixXd& overlay) {
  io::Table t;
  t.key_names = {"channel"};
  for (Eigen::Index c = 0; c < overlay.cols(); ++c) t.value_names.push_back("slice" + std::to_string(c));
  for (Eigen::Index r = 0; r < overlay.rows(); ++r) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < overlay.cols(); ++c) row.push_back(overlay(r, c));
    t.add_row({"ch" + std::to_string(r)}, std::move(row));
  }
  return t;
}

}  // namespace mts::explain
