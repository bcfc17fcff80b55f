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

#include "mts/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mts/io.hpp"
#include "mts/log.hpp"
#include "mts/parallel.hpp"

namespace mts::classifiers {

namespace {

using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t effective_radius(std::size_t n, std::size_t m, std::optional<std::size_t> band, bool warn) {
  const std::size_t diff = n > m ? n - m : m - n;
  if (!band) return std::max(n, m);
  if (*band < diff) {
    if (warn) {
      log_warn("classifiers", "band radius " + std::to_string(*band) + " raised to length difference " +
                                  std::to_string(diff));
    }
    return diff;
  }
  return *band;
}

/// Two-row DP over the (banded) n x m grid. cost(i, j) is the local cost.
template <typename Cost>
double dtw_grid(std::size_t n, std::size_t m, std::size_t radius, Cost&& cost) {
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    const std::size_t lo = i > radius ? i - radius : 1;
    const std::size_t hi = std::min(m, i + radius);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      cur[j] = best + cost(i - 1, j - 1);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double dtw_univariate(std::span<const double> a, std::span<const double> b, std::size_t radius) {
  return dtw_grid(a.size(), b.size(), radius,
                  [&](std::size_t i, std::size_t j) { return std::abs(a[i] - b[j]); });
}

double dtw_samples(const Sample& a, const Sample& b, const DtwOptions& opts, bool warn) {
  const std::size_t n = a.length();
  const std::size_t m = b.length();
  if (n == 0 || m == 0) fail("DTW on an empty series");
  if (a.channels.size() != b.channels.size()) fail("DTW channel count mismatch");
  const std::size_t r = effective_radius(n, m, opts.band_radius, warn);
  if (opts.mode == DtwMode::independent) {
    double total = 0.0;
    for (std::size_t c = 0; c < a.channels.size(); ++c) {
      total += dtw_univariate(a.channels[c], b.channels[c], r);
    }
    return total;
  }
  const std::size_t nc = a.channels.size();
  return dtw_grid(n, m, r, [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double d = a.channels[c][i] - b.channels[c][j];
      s += d * d;
    }
    return std::sqrt(s);
  });
}

}  // namespace

std::string_view to_string(DtwMode mode) {
  return mode == DtwMode::dependent ? "dependent" : "independent";
}

std::string_view to_string(DistanceKind kind) {
  return kind == DistanceKind::euclidean ? "euclidean" : "dtw";
}

DtwMode dtw_mode_from_string(std::string_view text) {
  if (text == "dependent") return DtwMode::dependent;
  if (text == "independent") return DtwMode::independent;
  fail("unknown DTW mode '" + std::string(text) + "'");
}

DistanceKind distance_kind_from_string(std::string_view text) {
  if (text == "euclidean") return DistanceKind::euclidean;
  if (text == "dtw") return DistanceKind::dtw;
  fail("unknown distance '" + std::string(text) + "'");
}

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    std::optional<std::size_t> band_radius) {
  if (a.empty() || b.empty()) fail("DTW on an empty series");
  return dtw_univariate(a, b, effective_radius(a.size(), b.size(), band_radius, true));
}

double dtw_distance(const Sample& a, const Sample& b, const DtwOptions& opts) {
  return dtw_samples(a, b, opts, true);
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t ClassProbabilities::argmax() const { return argmax_first(p); }

// --- channel statistics ------------------------------------------------------

ChannelStats ChannelStats::fit(const Dataset& train) {
  ChannelStats st;
  for (std::size_t c = 0; c < kChannels; ++c) {
    double sum = 0.0;
    double count = 0.0;
    for (const auto& s : train.samples) {
      for (double v : s.channels[c]) sum += v;
      count += static_cast<double>(s.length());
    }
    if (count == 0.0) fail("cannot fit channel statistics on an empty dataset");
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& s : train.samples) {
      for (double v : s.channels[c]) ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / count);
    st.mean[c] = mean;
    st.stddev[c] = sd > 0.0 ? sd : 1.0;
  }
  return st;
}

ChannelStats ChannelStats::identity() {
  ChannelStats st;
  st.mean.fill(0.0);
  st.stddev.fill(1.0);
  return st;
}

Sample ChannelStats::apply(const Sample& s) const {
  Sample out = s;
  for (std::size_t c = 0; c < out.channels.size() && c < kChannels; ++c) {
    for (double& v : out.channels[c]) v = (v - mean[c]) / stddev[c];
  }
  return out;
}

// --- neighbor model ----------------------------------------------------------

NeighborModel NeighborModel::fit(const features::FeatureMatrix& train, const LabelAlphabet& alphabet,
                                 const KnnOptions& opts) {
  if (opts.k < 1) fail("k must be >= 1");
  if (opts.k > train.rows()) {
    fail("k = " + std::to_string(opts.k) + " exceeds the " + std::to_string(train.rows()) + " references");
  }
  NeighborModel m;
  m.opts_ = opts;
  m.opts_.distance = DistanceKind::euclidean;
  m.alphabet_ = alphabet;
  for (const auto& l : train.labels) m.labels_.push_back(alphabet.require_index(l));
  m.vectors_ = train;
  return m;
}

NeighborModel NeighborModel::fit(const Dataset& train, const KnnOptions& opts) {
  if (opts.k < 1) fail("k must be >= 1");
  if (opts.k > train.size()) {
    fail("k = " + std::to_string(opts.k) + " exceeds the " + std::to_string(train.size()) + " references");
  }
  NeighborModel m;
  m.opts_ = opts;
  m.opts_.distance = DistanceKind::dtw;
  m.alphabet_ = train.alphabet;
  m.stats_ = opts.znormalize ? ChannelStats::fit(train) : ChannelStats::identity();
  m.samples_.reserve(train.size());
  for (const auto& s : train.samples) {
    m.labels_.push_back(train.alphabet.require_index(s.label));
    m.samples_.push_back(opts.znormalize ? m.stats_.apply(s) : s);
  }
  return m;
}

ClassProbabilities NeighborModel::vote(std::span<const double> distances) const {
  if (distances.size() != labels_.size()) fail("distance row does not match the reference count");
  std::vector<std::size_t> order(labels_.size());
  std::iota(order.begin(), order.end(), 0);
  const auto k = static_cast<std::ptrdiff_t>(opts_.k);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
    return distances[a] < distances[b] || (distances[a] == distances[b] && a < b);
  });
  ClassProbabilities out;
  out.p.assign(alphabet_.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < k; ++i) out.p[labels_[order[static_cast<std::size_t>(i)]]] += 1.0;
  for (double& v : out.p) v /= static_cast<double>(opts_.k);
  return out;
}

ClassProbabilities NeighborModel::predict(const Eigen::VectorXd& query) const {
  if (opts_.distance != DistanceKind::euclidean) fail("model holds raw series; predict with a Sample");
  if (query.size() != vectors_.values.cols()) {
    fail("query has " + std::to_string(query.size()) + " features, model expects " +
         std::to_string(vectors_.values.cols()));
  }
  std::vector<double> d(labels_.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    d[r] = (vectors_.values.row(static_cast<Eigen::Index>(r)).transpose() - query).norm();
  }
  return vote(d);
}

ClassProbabilities NeighborModel::predict(const Sample& query) const {
  if (opts_.distance != DistanceKind::dtw) fail("model holds feature vectors; predict with a vector");
  const Sample q = stats_.apply(query);
  std::vector<double> d(samples_.size());
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = dtw_samples(q, samples_[r], opts_.dtw, false);
  return vote(d);
}

bool NeighborModel::operator==(const NeighborModel& o) const {
  const auto same_vectors = vectors_.columns == o.vectors_.columns &&
                            vectors_.sample_ids == o.vectors_.sample_ids &&
                            vectors_.labels == o.vectors_.labels &&
                            vectors_.values.rows() == o.vectors_.values.rows() &&
                            vectors_.values.cols() == o.vectors_.values.cols() &&
                            (vectors_.values.array() == o.vectors_.values.array()).all();
  return opts_.k == o.opts_.k && opts_.distance == o.opts_.distance &&
         opts_.dtw.mode == o.opts_.dtw.mode && opts_.dtw.band_radius == o.opts_.dtw.band_radius &&
         opts_.znormalize == o.opts_.znormalize && alphabet_ == o.alphabet_ && labels_ == o.labels_ &&
         same_vectors && samples_ == o.samples_ && stats_ == o.stats_;
}

void NeighborModel::save(const std::filesystem::path& path) const {
  json head;
  head["format"] = "mts-knn";
  head["k"] = opts_.k;
  head["distance"] = std::string(to_string(opts_.distance));
  head["dtw_mode"] = std::string(to_string(opts_.dtw.mode));
  head["band"] = opts_.dtw.band_radius ? json(*opts_.dtw.band_radius) : json(nullptr);
  head["znormalize"] = opts_.znormalize;
  head["alphabet_mode"] = std::string(to_string(alphabet_.mode()));
  head["alphabet"] = alphabet_.symbols();
  head["columns"] = vectors_.columns;
  head["channel_mean"] = stats_.mean;
  head["channel_std"] = stats_.stddev;
  std::string out = head.dump() + "\n";
  if (opts_.distance == DistanceKind::euclidean) {
    for (std::size_t r = 0; r < labels_.size(); ++r) {
      json row;
      row["id"] = vectors_.sample_ids[r];
      row["label"] = vectors_.labels[r];
      std::vector<double> x(static_cast<std::size_t>(vectors_.values.cols()));
      for (std::size_t c = 0; c < x.size(); ++c) {
        x[c] = vectors_.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
      row["x"] = x;
      out += row.dump() + "\n";
    }
  } else {
    for (const auto& s : samples_) out += io::encode_sample(s) + "\n";
  }
  io::write_file(path, out);
}

NeighborModel NeighborModel::load(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  const auto lines = io::split(text, '\n');
  if (lines.empty()) fail(path.string() + ": empty model file");
  json head;
  try {
    head = json::parse(lines[0]);
    if (head.value("format", "") != "mts-knn") fail(path.string() + ": not a kNN model file");
    NeighborModel m;
    m.opts_.k = head.at("k").get<std::size_t>();
    m.opts_.distance = distance_kind_from_string(head.at("distance").get<std::string>());
    m.opts_.dtw.mode = dtw_mode_from_string(head.at("dtw_mode").get<std::string>());
    if (!head.at("band").is_null()) m.opts_.dtw.band_radius = head.at("band").get<std::size_t>();
    m.opts_.znormalize = head.at("znormalize").get<bool>();
    const auto mode = case_mode_from_string(head.at("alphabet_mode").get<std::string>());
    auto symbols = head.at("alphabet").get<std::vector<std::string>>();
    m.alphabet_ = mode == CaseMode::custom ? LabelAlphabet::custom(symbols) : LabelAlphabet::make(mode);
    m.stats_.mean = head.at("channel_mean").get<std::array<double, kChannels>>();
    m.stats_.stddev = head.at("channel_std").get<std::array<double, kChannels>>();
    m.vectors_.columns = head.at("columns").get<std::vector<std::string>>();
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (io::trim(lines[i]).empty()) continue;
      if (m.opts_.distance == DistanceKind::euclidean) {
        const json row = json::parse(lines[i]);
        m.vectors_.sample_ids.push_back(row.at("id").get<std::string>());
        m.vectors_.labels.push_back(row.at("label").get<std::string>());
        rows.push_back(row.at("x").get<std::vector<double>>());
        if (rows.back().size() != m.vectors_.columns.size()) fail(path.string() + ": ragged reference row");
        m.labels_.push_back(m.alphabet_.require_index(m.vectors_.labels.back()));
      } else {
        m.samples_.push_back(io::decode_sample(lines[i], i + 1));
        m.labels_.push_back(m.alphabet_.require_index(m.samples_.back().label));
      }
    }
    m.vectors_.values.resize(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(m.vectors_.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        m.vectors_.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    if (m.opts_.k < 1 || m.opts_.k > m.labels_.size()) fail(path.string() + ": k exceeds reference count");
    return m;
  } catch (const json::exception& e) {
    fail(path.string() + ": malformed model file: " + e.what());
  }
}

// --- batch distances -----------------------------------------------------------

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& references) {
  if (queries.rows() == 0 || references.rows() == 0) fail("empty distance matrix operand");
  if (queries.cols() != references.cols()) fail("dimension mismatch in distance matrix");
  Eigen::MatrixXd out(queries.rows(), references.rows());
  parallel_for(static_cast<std::size_t>(queries.rows()), [&](std::size_t i) {
    const auto q = queries.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < references.rows(); ++j) {
      out(static_cast<Eigen::Index>(i), j) = (q - references.row(j)).norm();
    }
  });
  return out;
}

Eigen::MatrixXd distance_matrix(const std::vector<Sample>& queries, const std::vector<Sample>& references,
                                const DtwOptions& opts) {
  if (queries.empty() || references.empty()) fail("empty distance matrix operand");
  if (opts.band_radius) {
    std::size_t longest_gap = 0;
    std::size_t qmin = SIZE_MAX, qmax = 0, rmin = SIZE_MAX, rmax = 0;
    for (const auto& s : queries) {
      qmin = std::min(qmin, s.length());
      qmax = std::max(qmax, s.length());
    }
    for (const auto& s : references) {
      rmin = std::min(rmin, s.length());
      rmax = std::max(rmax, s.length());
    }
    longest_gap = std::max(qmax > rmin ? qmax - rmin : 0, rmax > qmin ? rmax - qmin : 0);
    if (*opts.band_radius < longest_gap) {
      log_warn("classifiers", "band radius " + std::to_string(*opts.band_radius) +
                                  " is raised per pair where lengths differ by more");
    }
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(references.size()));
  const std::size_t cols = references.size();
  parallel_for(queries.size() * cols, [&](std::size_t idx) {
    const std::size_t i = idx / cols;
    const std::size_t j = idx % cols;
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        dtw_samples(queries[i], references[j], opts, false);
  });
  return out;
}

}  // namespace mts::classifiers
