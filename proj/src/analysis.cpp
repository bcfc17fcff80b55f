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

#include "mts/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mts/parallel.hpp"

namespace mts::analysis {

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) {
    fail("length mismatch: " + std::to_string(predicted.size()) + " predictions, " + std::to_string(truth.size()) +
         " labels");
  }
  if (truth.empty()) fail("accuracy of an empty label set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

Confusion confusion_matrix(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                           std::size_t n_classes) {
  if (predicted.size() != truth.size()) fail("length mismatch in confusion matrix");
  Confusion c(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n_classes || predicted[i] >= n_classes) fail("class index out of range");
    ++c[truth[i]][predicted[i]];
  }
  return c;
}

FoldReport make_report(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                       std::size_t n_classes) {
  FoldReport r;
  r.mean = accuracy(predicted, truth);
  r.fold_accuracy = {r.mean};
  r.confusion = confusion_matrix(predicted, truth, n_classes);
  return r;
}

FoldReport fold_average(const std::vector<FoldReport>& folds) {
  if (folds.empty()) fail("fold_average needs at least one fold");
  FoldReport out;
  out.confusion = folds.front().confusion;
  for (auto& row : out.confusion) std::fill(row.begin(), row.end(), 0);
  for (const auto& f : folds) {
    out.fold_accuracy.insert(out.fold_accuracy.end(), f.fold_accuracy.begin(), f.fold_accuracy.end());
    if (f.confusion.size() != out.confusion.size()) fail("folds disagree on the class count");
    for (std::size_t i = 0; i < f.confusion.size(); ++i) {
      for (std::size_t j = 0; j < f.confusion[i].size(); ++j) out.confusion[i][j] += f.confusion[i][j];
    }
  }
  double sum = 0.0;
  for (double a : out.fold_accuracy) sum += a;
  out.mean = sum / static_cast<double>(out.fold_accuracy.size());
  return out;
}

std::vector<std::size_t> align_truth(const ensemble::PredictionMatrix& pm,
                                     const std::map<std::string, std::string>& labels_by_id) {
  std::vector<std::size_t> out;
  out.reserve(pm.samples());
  for (const auto& id : pm.sample_ids) {
    auto it = labels_by_id.find(id);
    if (it == labels_by_id.end()) fail("no true label for sample '" + id + "'");
    out.push_back(pm.alphabet.require_index(it->second));
  }
  return out;
}

PredictionSpace prediction_space(const ensemble::PredictionMatrix& pm, std::span<const std::size_t> truth,
                                 std::size_t target_class) {
  if (truth.size() != pm.samples()) fail("truth length does not match the prediction matrix");
  if (target_class >= pm.alphabet.size()) fail("target class outside the alphabet");
  PredictionSpace ps;
  ps.model_ids = pm.model_ids;
  std::vector<std::size_t> cols;
  for (std::size_t s = 0; s < pm.samples(); ++s) {
    if (truth[s] == target_class) {
      cols.push_back(s);
      ps.sample_ids.push_back(pm.sample_ids[s]);
    }
  }
  if (cols.empty()) fail("class '" + pm.alphabet[target_class] + "' is absent from the test set");
  ps.correct.assign(pm.models(), std::vector<bool>(cols.size(), false));
  for (std::size_t m = 0; m < pm.models(); ++m) {
    for (std::size_t j = 0; j < cols.size(); ++j) ps.correct[m][j] = pm.argmax(m, cols[j]) == target_class;
  }
  return ps;
}

RescueReport failure_rescue(const ensemble::PredictionMatrix& pm, std::span<const std::size_t> truth,
                            const std::string& anchor) {
  if (truth.size() != pm.samples()) fail("truth length does not match the prediction matrix");
  const std::size_t a = pm.model_index(anchor);
  RescueReport r;
  r.anchor = anchor;
  for (std::size_t m = 0; m < pm.models(); ++m) {
    if (m != a) r.model_ids.push_back(pm.model_ids[m]);
  }
  r.rescued.assign(r.model_ids.size(), 0);
  for (std::size_t s = 0; s < pm.samples(); ++s) {
    if (pm.argmax(a, s) == truth[s]) continue;
    ++r.anchor_failures;
    bool any = false;
    std::size_t slot = 0;
    for (std::size_t m = 0; m < pm.models(); ++m) {
      if (m == a) continue;
      if (pm.argmax(m, s) == truth[s]) {
        ++r.rescued[slot];
        any = true;
      }
      ++slot;
    }
    if (any) ++r.rescued_by_any;
  }
  return r;
}

io::Table to_table(const PredictionSpace& ps) {
  io::Table t;
  t.key_names = {"model_id"};
  t.value_names = ps.sample_ids;
  for (std::size_t m = 0; m < ps.model_ids.size(); ++m) {
    std::vector<double> row;
    for (bool ok : ps.correct[m]) row.push_back(ok ? 1.0 : 0.0);
    t.add_row({ps.model_ids[m]}, std::move(row));
  }
  return t;
}

io::Table to_table(const RescueReport& r) {
  io::Table t;
  t.preamble = {"anchor=" + r.anchor};
  t.key_names = {"model_id"};
  t.value_names = {"rescued", "anchor_failures"};
  const auto failures = static_cast<double>(r.anchor_failures);
  for (std::size_t i = 0; i < r.model_ids.size(); ++i) {
    t.add_row({r.model_ids[i]}, {static_cast<double>(r.rescued[i]), failures});
  }
  t.add_row({"any"}, {static_cast<double>(r.rescued_by_any), failures});
  return t;
}

io::Table to_table(const FoldReport& r, const LabelAlphabet& alphabet) {
  io::Table t;
  std::string folds = "fold_accuracy=";
  for (std::size_t i = 0; i < r.fold_accuracy.size(); ++i) {
    if (i) folds += ';';
    folds += io::format_double(r.fold_accuracy[i]);
  }
  t.preamble = {"mean_accuracy=" + io::format_double(r.mean), folds};
  t.key_names = {"truth"};
  t.value_names = alphabet.symbols();
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    std::vector<double> row(r.confusion[i].begin(), r.confusion[i].end());
    t.add_row({alphabet[i]}, std::move(row));
  }
  return t;
}

void write_pgm(const Eigen::MatrixXd& intensity, const std::filesystem::path& path) {
  if (intensity.size() == 0) fail("cannot write an empty image");
  std::string out = "P5\n" + std::to_string(intensity.cols()) + " " + std::to_string(intensity.rows()) + "\n255\n";
  for (Eigen::Index r = 0; r < intensity.rows(); ++r) {
    for (Eigen::Index c = 0; c < intensity.cols(); ++c) {
      const double v = std::clamp(intensity(r, c), 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  io::write_file(path, out);
}

Eigen::MatrixXd to_intensity(const PredictionSpace& ps) {
  const auto rows = static_cast<Eigen::Index>(ps.model_ids.size());
  const auto cols = static_cast<Eigen::Index>(ps.sample_ids.size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = ps.correct[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] ? 1.0 : 0.0;
    }
  }
  return m;
}

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::n_significant: return "n_significant";
    case SweepParam::n_components: return "n_components";
    case SweepParam::k: return "k";
    case SweepParam::band_radius: return "band_radius";
  }
  return "n_significant";
}

SweepParam sweep_param_from_string(std::string_view text) {
  for (auto p : {SweepParam::n_significant, SweepParam::n_components, SweepParam::k, SweepParam::band_radius}) {
    if (to_string(p) == text) return p;
  }
  fail("unknown sweep parameter '" + std::string(text) + "'");
}

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> grid;
  const std::string t = io::trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = io::split(t, ':');
    if (parts.size() < 2 || parts.size() > 3) fail("grid '" + t + "': expected a:b or a:b:step");
    const double a = io::parse_double(io::trim(parts[0]));
    const double b = io::parse_double(io::trim(parts[1]));
    const double step = parts.size() == 3 ? io::parse_double(io::trim(parts[2])) : 1.0;
    if (!(step > 0.0)) fail("grid '" + t + "': step must be positive");
    if (b < a) fail("grid '" + t + "': empty range");
    for (std::size_t i = 0;; ++i) {
      const double v = a + static_cast<double>(i) * step;
      if (v > b + 1e-9 * std::max(1.0, std::abs(b))) break;
      grid.push_back(v);
    }
  } else {
    for (const auto& part : io::split(t, ',')) {
      const std::string p = io::trim(part);
      if (!p.empty()) grid.push_back(io::parse_double(p));
    }
  }
  if (grid.empty()) fail("grid is empty");
  return grid;
}

namespace {

pipeline::Config with_value(pipeline::Config cfg, SweepParam param, double value) {
  if (value < 0.0 || value != std::floor(value)) {
    fail(std::string(to_string(param)) + "=" + io::format_double(value) + ": expected a non-negative integer");
  }
  switch (param) {
    case SweepParam::n_significant: cfg.n_significant = static_cast<int>(value); break;
    case SweepParam::n_components: cfg.n_components = static_cast<int>(value); break;
    case SweepParam::k: cfg.knn.k = static_cast<std::size_t>(value); break;
    case SweepParam::band_radius: cfg.knn.dtw.band_radius = static_cast<std::size_t>(value); break;
  }
  return cfg;
}

}  // namespace

std::vector<SweepRow> sweep(SweepParam param, const std::vector<double>& grid, const std::vector<Fold>& folds,
                            const pipeline::Config& base) {
  if (grid.empty()) fail("grid is empty");
  if (folds.empty()) fail("sweep needs at least one fold");
  if (param == SweepParam::band_radius && base.kind != pipeline::ModelKind::dtw) {
    fail("band_radius sweeps need a dtw pipeline");
  }
  // Preprocessing, extraction and the U-tests do not depend on the swept
  // value, so every grid point shares them.
  std::vector<pipeline::FoldCache> caches(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    caches[f] = pipeline::prepare_fold(folds[f].train, folds[f].test, base);
  }
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    pipeline::Config cfg = with_value(base, param, grid[i]);
    cfg.seed = base.seed + i;
    SweepRow row;
    row.value = grid[i];
    std::size_t features = 0;
    for (std::size_t f = 0; f < caches.size(); ++f) {
      try {
        const auto r = pipeline::evaluate(caches[f], cfg);
        row.fold_accuracy.push_back(r.accuracy);
        features += r.n_features;
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(to_string(param)) + "=" + io::format_double(grid[i]) + ": " + e.what());
      }
    }
    double sum = 0.0;
    for (double a : row.fold_accuracy) sum += a;
    row.mean_accuracy = sum / static_cast<double>(row.fold_accuracy.size());
    row.n_features = features / caches.size();
    rows[i] = std::move(row);
  });
  return rows;
}

io::Table to_table(SweepParam param, const std::vector<SweepRow>& rows) {
  io::Table t;
  t.key_names = {std::string(to_string(param))};
  t.value_names = {"mean_accuracy", "n_features"};
  const std::size_t n_folds = rows.empty() ? 0 : rows.front().fold_accuracy.size();
  for (std::size_t f = 0; f < n_folds; ++f) t.value_names.push_back("fold" + std::to_string(f));
  for (const auto& r : rows) {
    std::vector<double> v = {r.mean_accuracy, static_cast<double>(r.n_features)};
    v.insert(v.end(), r.fold_accuracy.begin(), r.fold_accuracy.end());
    t.add_row({io::format_double(r.value)}, std::move(v));
  }
  return t;
}

}  // namespace mts::analysis
