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

#include "mts/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mts/log.hpp"
#include "mts/parallel.hpp"

namespace mts::selection {

namespace {

constexpr std::size_t kExactLimit = 8;

struct Ranking {
  std::vector<double> ranks;  // 1-based midranks
  double tie_term = 0.0;      // sum over tie groups of t^3 - t
  bool constant = false;
};

Ranking rank_values(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Ranking r;
  r.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r.ranks[order[k]] = mid;
    const double t = static_cast<double>(j - i + 1);
    r.tie_term += t * t * t - t;
    i = j + 1;
  }
  r.constant = n > 0 && values[order.front()] == values[order.back()];
  return r;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// `in_a[i]` marks membership of pooled element i in the first group.
double exact_p(const std::vector<double>& ranks, const std::vector<bool>& in_a) {
  const std::size_t n = ranks.size();
  std::vector<int> doubled(n);
  int observed = 0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    if (in_a[i]) {
      observed += doubled[i];
      ++n1;
    }
  }
  const int max_sum = std::accumulate(doubled.begin(), doubled.end(), 0);
  // ways[k][s]: number of size-k subsets with doubled rank sum s.
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = std::min(n1, i + 1); k >= 1; --k) {
      for (int s = max_sum; s >= doubled[i]; --s) {
        ways[k][static_cast<std::size_t>(s)] += ways[k - 1][static_cast<std::size_t>(s - doubled[i])];
      }
    }
  }
  const int expected = static_cast<int>(n1 * (n + 1));
  const int dev = std::abs(observed - expected);
  double total = 0.0;
  double extreme = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    const double w = ways[n1][static_cast<std::size_t>(s)];
    total += w;
    if (std::abs(s - expected) >= dev) extreme += w;
  }
  return std::min(1.0, extreme / total);
}

double normal_p(double rank_sum_a, double n1, double n2, double tie_term) {
  const double n = n1 + n2;
  const double u1 = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  const double u = std::max(u1, n1 * n2 - u1);
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = (u - mu - 0.5) / std::sqrt(var);
  return std::clamp(2.0 * normal_sf(z), 0.0, 1.0);
}

double pvalue_from_ranking(const Ranking& r, const std::vector<bool>& in_a, std::size_t n1) {
  const std::size_t n = r.ranks.size();
  const std::size_t n2 = n - n1;
  if (n1 == 0 || n2 == 0 || r.constant) return 1.0;
  if (n1 <= kExactLimit && n2 <= kExactLimit) return exact_p(r.ranks, in_a);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_a[i]) sum += r.ranks[i];
  }
  return normal_p(sum, static_cast<double>(n1), static_cast<double>(n2), r.tie_term);
}

}  // namespace

double mann_whitney_p(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<bool> in_a(pooled.size(), false);
  std::fill(in_a.begin(), in_a.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
  return pvalue_from_ranking(rank_values(pooled), in_a, a.size());
}

PValueTable relevance_pvalues(const features::FeatureMatrix& fm, const LabelAlphabet& alphabet) {
  const std::size_t n = fm.rows();
  const std::size_t nc = alphabet.size();
  std::vector<std::size_t> label_idx(n);
  std::vector<std::size_t> class_count(nc, 0);
  for (std::size_t i = 0; i < n; ++i) {
    label_idx[i] = alphabet.require_index(fm.labels[i]);
    ++class_count[label_idx[i]];
  }
  PValueTable table;
  table.p = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(fm.cols()), static_cast<Eigen::Index>(nc));
  table.class_flagged.assign(nc, false);
  std::vector<std::vector<bool>> membership(nc, std::vector<bool>(n, false));
  for (std::size_t c = 0; c < nc; ++c) {
    if (class_count[c] < 2 || n - class_count[c] < 2) {
      table.class_flagged[c] = true;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) membership[c][i] = label_idx[i] == c;
  }
  parallel_for(fm.cols(), [&](std::size_t f) {
    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
    }
    const Ranking r = rank_values(column);
    if (r.constant) return;
    for (std::size_t c = 0; c < nc; ++c) {
      if (table.class_flagged[c]) continue;
      table.p(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c)) =
          pvalue_from_ranking(r, membership[c], class_count[c]);
    }
  });
  return table;
}

std::vector<bool> benjamini_yekutieli(std::span<const double> pvals, double q) {
  if (!(q > 0.0 && q < 1.0)) fail("FDR level must lie in (0, 1)");
  const std::size_t m = pvals.size();
  std::vector<bool> reject(m, false);
  if (m == 0) return reject;
  double harmonic = 0.0;
  for (std::size_t i = 1; i <= m; ++i) harmonic += 1.0 / static_cast<double>(i);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::size_t k = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double threshold = static_cast<double>(i) * q / (static_cast<double>(m) * harmonic);
    if (pvals[order[i - 1]] <= threshold) k = i;
  }
  for (std::size_t i = 0; i < k; ++i) reject[order[i]] = true;
  return reject;
}

std::size_t SelectionResult::significance_count(std::size_t feature) const {
  const auto& row = per_class_significant[feature];
  return static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
}

SelectionResult with_threshold(const SelectionResult& base, int n_significant) {
  if (n_significant < 1 || static_cast<std::size_t>(n_significant) > base.class_symbols.size()) {
    fail("n_significant must lie in [1, number of classes]");
  }
  SelectionResult out = base;
  out.n_significant = n_significant;
  out.selected.clear();
  for (std::size_t f = 0; f < out.all_columns.size(); ++f) {
    if (out.significance_count(f) >= static_cast<std::size_t>(n_significant)) {
      out.selected.push_back(out.all_columns[f]);
    }
  }
  return out;
}

SelectionResult select_features(const features::FeatureMatrix& fm, const LabelAlphabet& alphabet,
                                int n_significant, double q) {
  const PValueTable table = relevance_pvalues(fm, alphabet);
  for (std::size_t c = 0; c < alphabet.size(); ++c) {
    if (table.class_flagged[c]) {
      log(LogLevel::debug, "selection", "class " + alphabet[c] + " has fewer than 2 samples; p = 1");
    }
  }
  SelectionResult sel;
  sel.all_columns = fm.columns;
  sel.class_symbols = alphabet.symbols();
  sel.fdr_level = q;
  sel.per_class_significant.assign(fm.cols(), std::vector<bool>(alphabet.size(), false));
  for (std::size_t c = 0; c < alphabet.size(); ++c) {
    std::vector<double> col(fm.cols());
    for (std::size_t f = 0; f < fm.cols(); ++f) {
      col[f] = table.p(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c));
    }
    const auto rejected = benjamini_yekutieli(col, q);
    for (std::size_t f = 0; f < fm.cols(); ++f) sel.per_class_significant[f][c] = rejected[f];
  }
  return with_threshold(sel, n_significant);
}

features::FeatureMatrix project(const features::FeatureMatrix& fm, const SelectionResult& sel) {
  if (sel.selected.empty()) fail("no features selected");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < fm.cols(); ++c) index.emplace(fm.columns[c], c);
  features::FeatureMatrix out;
  out.columns = sel.selected;
  out.sample_ids = fm.sample_ids;
  out.labels = fm.labels;
  out.values.resize(fm.values.rows(), static_cast<Eigen::Index>(sel.selected.size()));
  for (std::size_t j = 0; j < sel.selected.size(); ++j) {
    auto it = index.find(sel.selected[j]);
    if (it == index.end()) fail("missing descriptor '" + sel.selected[j] + "'");
    out.values.col(static_cast<Eigen::Index>(j)) = fm.values.col(static_cast<Eigen::Index>(it->second));
  }
  return out;
}

void write_selection(const SelectionResult& sel, const std::filesystem::path& path) {
  io::Table t;
  std::string classes;
  for (std::size_t c = 0; c < sel.class_symbols.size(); ++c) {
    if (c) classes += ';';
    classes += sel.class_symbols[c];
  }
  t.preamble = {"mts-selection n_significant=" + std::to_string(sel.n_significant) +
                    " fdr_q=" + io::format_double(sel.fdr_level),
                "classes=" + classes};
  t.key_names = {"descriptor"};
  t.value_names = {"selected", "significant_classes"};
  t.tail_names = {"class_mask"};
  std::vector<bool> chosen(sel.all_columns.size(), false);
  {
    std::size_t s = 0;
    for (std::size_t f = 0; f < sel.all_columns.size() && s < sel.selected.size(); ++f) {
      if (sel.all_columns[f] == sel.selected[s]) {
        chosen[f] = true;
        ++s;
      }
    }
  }
  for (std::size_t f = 0; f < sel.all_columns.size(); ++f) {
    std::string mask;
    for (bool b : sel.per_class_significant[f]) mask += b ? '1' : '0';
    t.add_row({sel.all_columns[f]},
              {chosen[f] ? 1.0 : 0.0, static_cast<double>(sel.significance_count(f))}, {mask});
  }
  io::write_table(t, path);
}

SelectionResult read_selection(const std::filesystem::path& path) {
  const io::Table t = io::read_table(path, 1, 1);
  if (t.preamble.size() < 2 || t.preamble[0].rfind("mts-selection", 0) != 0 ||
      t.preamble[1].rfind("classes=", 0) != 0) {
    fail(path.string() + ": not a selection file");
  }
  SelectionResult sel;
  std::istringstream head(t.preamble[0]);
  std::string token;
  while (head >> token) {
    if (token.rfind("n_significant=", 0) == 0) sel.n_significant = std::stoi(token.substr(14));
    if (token.rfind("fdr_q=", 0) == 0) sel.fdr_level = io::parse_double(token.substr(6));
  }
  sel.class_symbols = io::split(t.preamble[1].substr(8), ';');
  for (std::size_t r = 0; r < t.rows(); ++r) {
    sel.all_columns.push_back(t.keys[r][0]);
    const std::string& mask = t.tails[r][0];
    if (mask.size() != sel.class_symbols.size()) fail(path.string() + ": class mask width mismatch");
    std::vector<bool> row;
    for (char ch : mask) row.push_back(ch == '1');
    sel.per_class_significant.push_back(std::move(row));
    if (t.values[r][0] != 0.0) sel.selected.push_back(t.keys[r][0]);
  }
  return sel;
}

}  // namespace mts::selection
