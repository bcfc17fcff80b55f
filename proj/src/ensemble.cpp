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

#include "mts/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mts/classifiers.hpp"
#include "mts/io.hpp"
#include "mts/log.hpp"

namespace mts::ensemble {

namespace {

constexpr double kRowTolerance = 1e-6;
constexpr double kRoundingSlack = 1e-12;

std::vector<std::size_t> model_indices(const PredictionMatrix& pm, const std::vector<std::string>& models) {
  if (models.empty()) fail("model subset is empty");
  std::vector<std::size_t> idx;
  for (const auto& m : models) idx.push_back(pm.model_index(m));
  return idx;
}

double weight_of(const TierWeights& w, const std::string& model) {
  auto it = w.find(model);
  if (it == w.end()) fail("missing weight for model '" + model + "'");
  if (!(it->second > 0.0)) fail("weight for model '" + model + "' must be positive");
  return it->second;
}

VoteResult finish(std::vector<std::vector<double>> scores, double total) {
  VoteResult r;
  r.labels.reserve(scores.size());
  for (auto& row : scores) {
    r.labels.push_back(classifiers::argmax_first(row));
    for (double& v : row) v /= total;
  }
  r.scores = std::move(scores);
  return r;
}

/// Hard votes: every model adds its weight to its argmax class.
VoteResult hard_vote(const PredictionMatrix& pm, const std::vector<std::size_t>& idx,
                     const std::vector<double>& weights) {
  std::vector<std::vector<double>> scores(pm.samples(), std::vector<double>(pm.alphabet.size(), 0.0));
  double total = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    total += weights[k];
    for (std::size_t s = 0; s < pm.samples(); ++s) scores[s][pm.argmax(idx[k], s)] += weights[k];
  }
  return finish(std::move(scores), total);
}

VoteResult probability_vote(const PredictionMatrix& pm, const std::vector<std::size_t>& idx,
                            const std::vector<double>* weights) {
  std::vector<std::vector<double>> scores(pm.samples(), std::vector<double>(pm.alphabet.size(), 0.0));
  double total = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double w = weights ? (*weights)[k] : 1.0;
    total += w;
    for (std::size_t s = 0; s < pm.samples(); ++s) {
      const auto& row = pm.tensor[idx[k]][s];
      for (std::size_t c = 0; c < row.size(); ++c) scores[s][c] += weights ? w * row[c] : row[c];
    }
  }
  return finish(std::move(scores), total);
}

}  // namespace

std::size_t PredictionMatrix::model_index(std::string_view id) const {
  auto it = std::find(model_ids.begin(), model_ids.end(), id);
  if (it == model_ids.end()) fail("unknown model id '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - model_ids.begin());
}

std::size_t PredictionMatrix::argmax(std::size_t m, std::size_t s) const {
  return classifiers::argmax_first(tensor[m][s]);
}

TierWeights default_tier_weights() {
  TierWeights w;
  for (const char* id : {"InceptionTime", "Optimized_InceptionTime", "XceptionTime", "ResNet"}) w[id] = kTopTier;
  for (const char* id : {"ResCNN", "Optimized_LSTM", "Optimized_MLSTM_FCN", "Optimized_LSTM_FCN"}) {
    w[id] = kMiddleTier;
  }
  for (const char* id : {"LSTM", "BILSTM", "MLSTM_FCN", "BIMLSTM_FCN", "FCN", "BILSTM_FCN", "LSTM_FCN", "XCM"}) {
    w[id] = kBottomTier;
  }
  return w;
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::plurality: return "plurality";
    case Scheme::weighted: return "weighted";
    case Scheme::soft: return "soft";
    case Scheme::weighted_soft: return "weighted-soft";
  }
  return "plurality";
}

Scheme scheme_from_string(std::string_view text) {
  if (text == "plurality") return Scheme::plurality;
  if (text == "weighted") return Scheme::weighted;
  if (text == "soft") return Scheme::soft;
  if (text == "weighted-soft") return Scheme::weighted_soft;
  fail("unknown voting scheme '" + std::string(text) + "'");
}

VoteResult plurality_vote(const PredictionMatrix& pm, const std::vector<std::string>& models) {
  const auto idx = model_indices(pm, models);
  return hard_vote(pm, idx, std::vector<double>(idx.size(), 1.0));
}

VoteResult weighted_vote(const PredictionMatrix& pm, const TierWeights& weights,
                         const std::vector<std::string>& models) {
  const auto idx = model_indices(pm, models);
  std::vector<double> w;
  for (const auto& m : models) w.push_back(weight_of(weights, m));
  return hard_vote(pm, idx, w);
}

VoteResult soft_vote(const PredictionMatrix& pm, const std::vector<std::string>& models) {
  return probability_vote(pm, model_indices(pm, models), nullptr);
}

VoteResult weighted_soft_vote(const PredictionMatrix& pm, const TierWeights& weights,
                              const std::vector<std::string>& models) {
  const auto idx = model_indices(pm, models);
  std::vector<double> w;
  for (const auto& m : models) w.push_back(weight_of(weights, m));
  return probability_vote(pm, idx, &w);
}

VoteResult vote(const PredictionMatrix& pm, Scheme scheme, const TierWeights& weights,
                const std::vector<std::string>& models) {
  switch (scheme) {
    case Scheme::plurality: return plurality_vote(pm, models);
    case Scheme::weighted: return weighted_vote(pm, weights, models);
    case Scheme::soft: return soft_vote(pm, models);
    case Scheme::weighted_soft: return weighted_soft_vote(pm, weights, models);
  }
  fail("unknown voting scheme");
}

std::vector<std::string> resolve_models(const PredictionMatrix& pm, const std::string& spec,
                                        const TierWeights& weights) {
  if (spec.empty() || spec == "all") return pm.model_ids;
  if (spec == "top3" || spec == "top4") {
    const std::size_t want = spec == "top3" ? 3 : 4;
    std::vector<std::string> ranked = pm.model_ids;
    if (!weights.empty()) {
      std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
        return weight_of(weights, a) > weight_of(weights, b);
      });
    }
    if (ranked.size() > want) ranked.resize(want);
    return ranked;
  }
  std::vector<std::string> out;
  for (const auto& part : io::split(spec, ',')) {
    const std::string id = io::trim(part);
    if (id.empty()) continue;
    pm.model_index(id);
    out.push_back(id);
  }
  if (out.empty()) fail("model subset is empty");
  return out;
}

PredictionMatrix as_prediction_matrix(const PredictionMatrix& source, const VoteResult& result,
                                      const std::string& model_id) {
  PredictionMatrix out;
  out.model_ids = {model_id};
  out.sample_ids = source.sample_ids;
  out.alphabet = source.alphabet;
  out.tensor = {result.scores};
  return out;
}

PredictionMatrix load_prediction_matrix(const std::filesystem::path& path, std::optional<CaseMode> mode) {
  // Peek at the header to see whether a trailing argmax column is present.
  const std::string text = io::read_file(path);
  std::size_t tail = 0;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      const std::string line = io::trim(std::string_view(text).substr(start, end - start));
      start = end + 1;
      if (line.empty() || line.front() == '#') continue;
      const auto cells = io::split(line, ',');
      if (!cells.empty() && io::trim(cells.back()) == "argmax") tail = 1;
      break;
    }
  }
  const io::Table t = io::parse_table(text, 2, tail, path.string());
  if (t.key_names[0] != "model_id" || t.key_names[1] != "sample_id") {
    fail(path.string() + ": prediction file must start with model_id,sample_id");
  }
  if (t.value_names.empty()) fail(path.string() + ": no class columns");
  PredictionMatrix pm;
  if (mode && *mode != CaseMode::custom) {
    pm.alphabet = LabelAlphabet::make(*mode);
    if (pm.alphabet.symbols() != t.value_names) fail(path.string() + ": class columns do not match the alphabet");
  } else {
    pm.alphabet = LabelAlphabet::custom(t.value_names);
    for (CaseMode m : {CaseMode::lower, CaseMode::upper, CaseMode::combined}) {
      if (LabelAlphabet::make(m).symbols() == t.value_names) pm.alphabet = LabelAlphabet::make(m);
    }
  }
  std::unordered_map<std::string, std::size_t> model_pos;
  std::vector<std::unordered_map<std::string, std::size_t>> sample_pos;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const std::string where = path.string() + " row " + std::to_string(r + 1) + ": ";
    const auto& model = t.keys[r][0];
    const auto& sample = t.keys[r][1];
    auto [mit, new_model] = model_pos.try_emplace(model, pm.model_ids.size());
    if (new_model) {
      pm.model_ids.push_back(model);
      pm.tensor.emplace_back();
      sample_pos.emplace_back();
    }
    const std::size_t m = mit->second;
    if (!sample_pos[m].try_emplace(sample, pm.tensor[m].size()).second) {
      fail(where + "duplicate sample '" + sample + "' for model '" + model + "'");
    }
    std::vector<double> row = t.values[r];
    double sum = 0.0;
    for (double v : row) {
      if (v < 0.0) fail(where + "negative probability");
      sum += v;
    }
    // Slack for the decimal rounding of the row itself.
    if (std::abs(sum - 1.0) > kRowTolerance + kRoundingSlack) {
      fail(where + "probabilities sum to " + io::format_double(sum));
    }
    if (std::abs(sum - 1.0) > kRoundingSlack) {
      log_warn("ensemble", where + "row sum " + io::format_double(sum) + " renormalized");
      for (double& v : row) v /= sum;
    }
    pm.tensor[m].push_back(std::move(row));
    if (m == 0) pm.sample_ids.push_back(sample);
  }
  if (pm.model_ids.empty()) fail(path.string() + ": no prediction rows");
  for (std::size_t m = 0; m < pm.models(); ++m) {
    if (pm.tensor[m].size() != pm.samples()) {
      fail(path.string() + ": ragged tensor (model '" + pm.model_ids[m] + "' has " +
           std::to_string(pm.tensor[m].size()) + " samples, expected " + std::to_string(pm.samples()) + ")");
    }
    // Reorder to the first model's sample order.
    std::vector<std::vector<double>> ordered(pm.samples());
    for (std::size_t s = 0; s < pm.samples(); ++s) {
      auto it = sample_pos[m].find(pm.sample_ids[s]);
      if (it == sample_pos[m].end()) {
        fail(path.string() + ": model '" + pm.model_ids[m] + "' lacks sample '" + pm.sample_ids[s] + "'");
      }
      ordered[s] = std::move(pm.tensor[m][it->second]);
    }
    pm.tensor[m] = std::move(ordered);
  }
  return pm;
}

void save_prediction_matrix(const PredictionMatrix& pm, const std::filesystem::path& path, bool with_argmax) {
  io::Table t;
  t.key_names = {"model_id", "sample_id"};
  t.value_names = pm.alphabet.symbols();
  if (with_argmax) t.tail_names = {"argmax"};
  for (std::size_t m = 0; m < pm.models(); ++m) {
    for (std::size_t s = 0; s < pm.samples(); ++s) {
      std::vector<std::string> tail;
      if (with_argmax) tail.push_back(pm.alphabet[pm.argmax(m, s)]);
      t.add_row({pm.model_ids[m], pm.sample_ids[s]}, pm.tensor[m][s], std::move(tail));
    }
  }
  io::write_table(t, path);
}

TierWeights load_weights(const std::filesystem::path& path) {
  const io::Table t = io::read_table(path, 1);
  if (t.key_names[0] != "model_id" || t.value_names != std::vector<std::string>{"weight"}) {
    fail(path.string() + ": weights file must have columns model_id,weight");
  }
  TierWeights w;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (!(t.values[r][0] > 0.0)) fail(path.string() + ": weight for '" + t.keys[r][0] + "' must be positive");
    if (!w.emplace(t.keys[r][0], t.values[r][0]).second) {
      fail(path.string() + ": duplicate model '" + t.keys[r][0] + "'");
    }
  }
  return w;
}

void save_weights(const TierWeights& w, const std::filesystem::path& path) {
  io::Table t;
  t.key_names = {"model_id"};
  t.value_names = {"weight"};
  for (const auto& [id, weight] : w) t.add_row({id}, {weight});
  io::write_table(t, path);
}

}  // namespace mts::ensemble
