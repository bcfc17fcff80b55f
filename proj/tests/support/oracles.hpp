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

// Slow but obviously correct reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace mts::testing {

// Top-down recursion over the DTW grid with a memo table.
inline double dtw_recursive(const std::function<double(std::size_t, std::size_t)>& cost, std::size_t i,
                            std::size_t j, std::map<std::pair<std::size_t, std::size_t>, double>& memo) {
  if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
  double best = std::numeric_limits<double>::infinity();
  if (i == 0 && j == 0) best = 0.0;
  if (i > 0) best = std::min(best, dtw_recursive(cost, i - 1, j, memo));
  if (j > 0) best = std::min(best, dtw_recursive(cost, i, j - 1, memo));
  if (i > 0 && j > 0) best = std::min(best, dtw_recursive(cost, i - 1, j - 1, memo));
  const double v = cost(i, j) + best;
  memo[{i, j}] = v;
  return v;
}

inline double dtw_recursive(const std::function<double(std::size_t, std::size_t)>& cost, std::size_t i,
                            std::size_t j) {
  std::map<std::pair<std::size_t, std::size_t>, double> memo;
  return dtw_recursive(cost, i, j, memo);
}

inline double dtw_univariate_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  return dtw_recursive([&](std::size_t i, std::size_t j) { return std::abs(a[i] - b[j]); }, a.size() - 1,
                       b.size() - 1);
}

// channels x time for both inputs; local cost is the Euclidean norm over channels.
inline double dtw_dependent_oracle(const std::vector<std::vector<double>>& a,
                                   const std::vector<std::vector<double>>& b) {
  auto cost = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c][i] - b[c][j]) * (a[c][i] - b[c][j]);
    return std::sqrt(s);
  };
  return dtw_recursive(cost, a[0].size() - 1, b[0].size() - 1);
}

// Direct reading of the Benjamini-Yekutieli step-up rule.
inline std::vector<bool> by_oracle(const std::vector<double>& p, double q) {
  const std::size_t m = p.size();
  std::vector<bool> out(m, false);
  if (m == 0) return out;
  double cm = 0.0;
  for (std::size_t i = 1; i <= m; ++i) cm += 1.0 / static_cast<double>(i);
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::size_t k = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    if (sorted[i - 1] <= static_cast<double>(i) * q / (static_cast<double>(m) * cm)) k = i;
  }
  if (k == 0) return out;
  const double cut = sorted[k - 1];
  for (std::size_t i = 0; i < m; ++i) out[i] = p[i] <= cut;
  return out;
}

// Exact two-sided Mann-Whitney p-value by enumerating every assignment of
// the pooled values to group a. Ties use midranks.
inline double mann_whitney_exact_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pooled[j] < pooled[i]) ++less;
      if (pooled[j] == pooled[i]) ++equal;
    }
    ranks[i] = less + (equal + 1.0) / 2.0;
  }
  const std::size_t na = a.size();
  const double mean_u = static_cast<double>(na * b.size()) / 2.0;
  auto u_of = [&](std::uint32_t mask) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) r += ranks[i];
    return r - static_cast<double>(na * (na + 1)) / 2.0;
  };
  std::uint32_t observed = (1u << na) - 1u;
  const double d_obs = std::abs(u_of(observed) - mean_u);
  double hits = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
    ++total;
    if (std::abs(u_of(mask) - mean_u) >= d_obs - 1e-9) ++hits;
  }
  return std::min(1.0, hits / total);
}

// Squared magnitude of an analog Butterworth high-pass after the bilinear
// transform with pre-warping, applied forward and backward.
inline double butterworth_hp_filtfilt_gain(double f_hz, double cutoff_hz, double fs_hz, int order) {
  const double warped = std::tan(M_PI * f_hz / fs_hz) / std::tan(M_PI * cutoff_hz / fs_hz);
  const double r2n = std::pow(warped, 2 * order);
  return r2n / (1.0 + r2n);
}

// Naive DFT magnitude of bin k.
inline double dft_magnitude(const std::vector<double>& x, std::size_t k) {
  std::complex<double> acc = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    acc += x[t] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * t) / n);
  }
  return std::abs(acc);
}

// Leave-one-out kNN accuracy with plain vote counts and lowest-label ties.
inline double loo_knn_accuracy(const Eigen::MatrixXd& X, const std::vector<int>& y, std::size_t k) {
  const auto n = X.rows();
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Eigen::Index>> d;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) d.push_back({(X.row(i) - X.row(j)).squaredNorm(), j});
    std::sort(d.begin(), d.end());
    std::map<int, int> votes;
    for (std::size_t t = 0; t < k && t < d.size(); ++t) ++votes[y[static_cast<std::size_t>(d[t].second)]];
    int best = -1, best_n = -1;
    for (auto [label, count] : votes)
      if (count > best_n) best = label, best_n = count;
    if (best == y[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

// Between-class over within-class scatter of a 1-D projection.
inline double fisher_ratio(const Eigen::MatrixXd& X, const std::vector<int>& y, const Eigen::VectorXd& w) {
  const Eigen::VectorXd z = X * w;
  std::map<int, std::vector<double>> groups;
  for (Eigen::Index i = 0; i < z.size(); ++i) groups[y[static_cast<std::size_t>(i)]].push_back(z(i));
  const double grand = z.mean();
  double between = 0.0, within = 0.0;
  for (const auto& [label, v] : groups) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    between += static_cast<double>(v.size()) * (m - grand) * (m - grand);
    for (double x : v) within += (x - m) * (x - m);
  }
  return between / within;
}

}  // namespace mts::testing
