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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mts/core.hpp"

namespace mts::ensemble {

/// models x samples x classes probabilities.
struct PredictionMatrix {
  std::vector<std::string> model_ids;
  std::vector<std::string> sample_ids;
  LabelAlphabet alphabet;
  /// tensor[m][s] is one probability row over `alphabet`.
  std::vector<std::vector<std::vector<double>>> tensor;

  std::size_t models() const { return model_ids.size(); }
  std::size_t samples() const { return sample_ids.size(); }
  std::size_t model_index(std::string_view id) const;
  /// Alphabet index of model m's argmax on sample s.
  std::size_t argmax(std::size_t m, std::size_t s) const;
  bool operator==(const PredictionMatrix&) const = default;
};

/// Model id -> voting weight.
using TierWeights = std::map<std::string, double>;

inline constexpr double kBottomTier = 1.0;
inline constexpr double kMiddleTier = 9.0;
inline constexpr double kTopTier = 45.0;

/// 4 top, 4 middle and 8 bottom models with weights 45 / 9 / 1.
TierWeights default_tier_weights();

enum class Scheme { plurality, weighted, soft, weighted_soft };
std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view text);

struct VoteResult {
  std::vector<std::size_t> labels;  // alphabet indices, one per sample
  /// Per-sample normalized scores (vote shares or averaged probabilities).
  std::vector<std::vector<double>> scores;
};

VoteResult plurality_vote(const PredictionMatrix& pm, const std::vector<std::string>& models);
VoteResult weighted_vote(const PredictionMatrix& pm, const TierWeights& weights,
                         const std::vector<std::string>& models);
VoteResult soft_vote(const PredictionMatrix& pm, const std::vector<std::string>& models);
VoteResult weighted_soft_vote(const PredictionMatrix& pm, const TierWeights& weights,
                              const std::vector<std::string>& models);

VoteResult vote(const PredictionMatrix& pm, Scheme scheme, const TierWeights& weights,
                const std::vector<std::string>& models);

/// Resolves `top3`, `top4`, `all` or a comma-separated id list. Ranked
/// presets order models by weight (descending) when weights are given,
/// otherwise by their order in the tensor.
std::vector<std::string> resolve_models(const PredictionMatrix& pm, const std::string& spec,
                                        const TierWeights& weights);

/// Packs a vote result as a single-model prediction matrix.
PredictionMatrix as_prediction_matrix(const PredictionMatrix& source, const VoteResult& result,
                                      const std::string& model_id);

/// CSV with columns model_id, sample_id, one column per class symbol, and an
/// optional trailing argmax column. Rows whose sum is off by at most 1e-6
/// are renormalized with a warning; larger deviations are errors.
PredictionMatrix load_prediction_matrix(const std::filesystem::path& path,
                                        std::optional<CaseMode> mode = std::nullopt);
void save_prediction_matrix(const PredictionMatrix& pm, const std::filesystem::path& path,
                            bool with_argmax = false);

/// `model_id,weight` CSV.
TierWeights load_weights(const std::filesystem::path& path);
void save_weights(const TierWeights& w, const std::filesystem::path& path);

}  // namespace mts::ensemble
