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

#include "mts/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mts/log.hpp"
#include "mts/parallel.hpp"

namespace mts::transforms {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

bool same(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

void require_columns(const std::vector<std::string>& expected, const features::FeatureMatrix& fm) {
  if (fm.columns != expected) {
    fail("feature columns do not match the fitted transform (" + std::to_string(fm.cols()) +
         " vs " + std::to_string(expected.size()) + " columns)");
  }
}

void orient_rows(MatrixXd& A) {
  for (Index r = 0; r < A.rows(); ++r) {
    Index arg = 0;
    A.row(r).cwiseAbs().maxCoeff(&arg);
    if (A(r, arg) < 0.0) A.row(r) *= -1.0;
  }
}

std::vector<std::string> component_names(Index k) {
  std::vector<std::string> names;
  for (Index i = 0; i < k; ++i) names.push_back("comp" + std::to_string(i));
  return names;
}

/// Column-wise quantile with linear interpolation on a sorted copy.
double sorted_quantile(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (s[hi] - s[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

std::vector<int> encode_labels(const std::vector<std::string>& labels) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

// --- quantile --------------------------------------------------------------

bool QuantileMap::operator==(const QuantileMap& o) const {
  return n_quantiles == o.n_quantiles && columns == o.columns && same(landmarks, o.landmarks);
}

QuantileMap fit_quantile(const features::FeatureMatrix& train, int n_quantiles) {
  if (n_quantiles < 2) fail("n_quantiles must be >= 2");
  if (train.rows() == 0) fail("cannot fit a quantile map on zero rows");
  QuantileMap qm;
  qm.n_quantiles = n_quantiles;
  qm.columns = train.columns;
  qm.landmarks.resize(n_quantiles, static_cast<Index>(train.cols()));
  parallel_for(train.cols(), [&](std::size_t f) {
    const auto col = train.values.col(static_cast<Index>(f));
    std::vector<double> s(col.data(), col.data() + col.size());
    std::sort(s.begin(), s.end());
    for (int i = 0; i < n_quantiles; ++i) {
      qm.landmarks(i, static_cast<Index>(f)) =
          sorted_quantile(s, static_cast<double>(i) / static_cast<double>(n_quantiles - 1));
    }
  });
  return qm;
}

double QuantileMap::apply_value(std::size_t feature, double v) const {
  const auto col = landmarks.col(static_cast<Index>(feature));
  const Index n = col.size();
  const double* first = col.data();
  const double* last = col.data() + n;
  if (v <= first[0]) return 0.0;
  if (v >= last[-1]) return 1.0;
  const double denom = static_cast<double>(n - 1);
  auto level = [&](Index lo, Index hi) {
    const double x0 = first[lo];
    const double x1 = first[hi];
    const double t = (v - x0) / (x1 - x0);
    return (static_cast<double>(lo) + t * static_cast<double>(hi - lo)) / denom;
  };
  // Average of the right-most and left-most interpolants so that runs of
  // equal landmarks map to the middle of their level range.
  const Index upper = std::upper_bound(first, last, v) - first;
  const Index lower = std::lower_bound(first, last, v) - first;
  double forward;
  double backward;
  if (first[upper - 1] == v) {
    forward = static_cast<double>(upper - 1) / denom;
  } else {
    forward = level(upper - 1, upper);
  }
  if (first[lower] == v) {
    backward = static_cast<double>(lower) / denom;
  } else {
    backward = level(lower - 1, lower);
  }
  return 0.5 * (forward + backward);
}

features::FeatureMatrix QuantileMap::apply(const features::FeatureMatrix& fm) const {
  require_columns(columns, fm);
  features::FeatureMatrix out = fm;
  parallel_for(fm.cols(), [&](std::size_t f) {
    for (Index r = 0; r < fm.values.rows(); ++r) {
      out.values(r, static_cast<Index>(f)) = apply_value(f, fm.values(r, static_cast<Index>(f)));
    }
  });
  return out;
}

// --- linear maps -------------------------------------------------------------

std::string_view to_string(LinearKind kind) {
  switch (kind) {
    case LinearKind::standardize: return "standardize";
    case LinearKind::pca: return "pca";
    case LinearKind::lda: return "lda";
    case LinearKind::nca: return "nca";
  }
  return "standardize";
}

LinearKind linear_kind_from_string(std::string_view text) {
  if (text == "standardize") return LinearKind::standardize;
  if (text == "pca") return LinearKind::pca;
  if (text == "lda") return LinearKind::lda;
  if (text == "nca") return LinearKind::nca;
  fail("unknown linear transform kind '" + std::string(text) + "'");
}

bool LinearMap::operator==(const LinearMap& o) const {
  return kind == o.kind && input_columns == o.input_columns && same(center, o.center) &&
         same(A, o.A) && same(spectrum, o.spectrum);
}

VectorXd LinearMap::apply(const VectorXd& x) const {
  if (x.size() != A.cols()) fail("dimension mismatch in linear transform");
  return A * (x - center);
}

features::FeatureMatrix LinearMap::apply(const features::FeatureMatrix& fm) const {
  require_columns(input_columns, fm);
  features::FeatureMatrix out;
  out.sample_ids = fm.sample_ids;
  out.labels = fm.labels;
  out.columns = kind == LinearKind::standardize ? input_columns : component_names(A.rows());
  out.values = (fm.values.rowwise() - center.transpose()) * A.transpose();
  return out;
}

LinearMap fit_standardize(const features::FeatureMatrix& train) {
  if (train.rows() == 0) fail("cannot standardize zero rows");
  LinearMap m;
  m.kind = LinearKind::standardize;
  m.input_columns = train.columns;
  const Index f = train.values.cols();
  m.center = train.values.colwise().mean().transpose();
  VectorXd scale(f);
  for (Index j = 0; j < f; ++j) {
    const double var = (train.values.col(j).array() - m.center(j)).square().mean();
    scale(j) = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  }
  m.A = scale.asDiagonal();
  return m;
}

LinearMap fit_pca(const features::FeatureMatrix& train, int n_components) {
  const Index f = train.values.cols();
  if (n_components < 1 || n_components > f) fail("n_components must lie in [1, n_features]");
  if (train.rows() < 2) fail("PCA needs at least 2 rows");
  LinearMap m;
  m.kind = LinearKind::pca;
  m.input_columns = train.columns;
  m.center = train.values.colwise().mean().transpose();
  const MatrixXd centered = train.values.rowwise() - m.center.transpose();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(train.rows() - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail("PCA eigendecomposition failed");
  m.A.resize(n_components, f);
  m.spectrum.resize(n_components);
  for (int k = 0; k < n_components; ++k) {
    m.A.row(k) = eig.eigenvectors().col(f - 1 - k).transpose();
    m.spectrum(k) = eig.eigenvalues()(f - 1 - k);
  }
  orient_rows(m.A);
  return m;
}

LdaFit fit_lda(const features::FeatureMatrix& train, int n_components) {
  const Index f = train.values.cols();
  const auto y = encode_labels(train.labels);
  const int n_classes = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
  if (n_components < 1 || n_components > std::min<Index>(f, n_classes - 1)) {
    fail("LDA n_components must lie in [1, min(n_features, n_classes - 1)]");
  }
  std::vector<Index> counts(static_cast<std::size_t>(n_classes), 0);
  for (int c : y) ++counts[static_cast<std::size_t>(c)];
  for (int c = 0; c < n_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] < 2) fail("LDA needs at least 2 samples per class");
  }
  const Index n = train.values.rows();
  MatrixXd means = MatrixXd::Zero(n_classes, f);
  for (Index i = 0; i < n; ++i) means.row(y[static_cast<std::size_t>(i)]) += train.values.row(i);
  for (int c = 0; c < n_classes; ++c) means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  const VectorXd overall = train.values.colwise().mean().transpose();

  MatrixXd within = MatrixXd::Zero(f, f);
  {
    MatrixXd centered = train.values;
    for (Index i = 0; i < n; ++i) centered.row(i) -= means.row(y[static_cast<std::size_t>(i)]);
    within.noalias() = centered.transpose() * centered / static_cast<double>(std::max<Index>(1, n - n_classes));
  }
  MatrixXd between = MatrixXd::Zero(f, f);
  for (int c = 0; c < n_classes; ++c) {
    const VectorXd d = means.row(c).transpose() - overall;
    between.noalias() += static_cast<double>(counts[static_cast<std::size_t>(c)]) * d * d.transpose();
  }
  between /= static_cast<double>(n);

  const double eps = std::max(1e-6 * within.trace() / static_cast<double>(f), 1e-12);
  within.diagonal().array() += eps;

  LdaFit fit;
  fit.degenerate = between.trace() <= 1e-12 * std::max(1.0, within.trace());
  if (fit.degenerate) log_warn("transforms", "LDA: between-class scatter is zero");

  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(between, within);
  if (eig.info() != Eigen::Success) fail("LDA generalized eigendecomposition failed");
  LinearMap& m = fit.map;
  m.kind = LinearKind::lda;
  m.input_columns = train.columns;
  m.center = overall;
  m.A.resize(n_components, f);
  m.spectrum.resize(n_components);
  for (int k = 0; k < n_components; ++k) {
    m.A.row(k) = eig.eigenvectors().col(f - 1 - k).transpose();
    m.spectrum(k) = eig.eigenvalues()(f - 1 - k);
  }
  orient_rows(m.A);
  return fit;
}

// --- NCA ---------------------------------------------------------------------

double nca_objective(const MatrixXd& A, const MatrixXd& X, const std::vector<int>& labels,
                     MatrixXd* grad) {
  const Index n = X.rows();
  if (n < 2) fail("NCA needs at least 2 samples");
  if (static_cast<Index>(labels.size()) != n) fail("label count does not match rows");
  if (A.cols() != X.cols()) fail("NCA transform width does not match features");
  const MatrixXd Y = X * A.transpose();  // n x d
  const VectorXd sq = Y.rowwise().squaredNorm();

  // Pass 1: row-wise softmax normalizers and own-class mass.
  VectorXd shift(n), norm(n), own(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
    const auto i = static_cast<Index>(iu);
    VectorXd d = (sq.array() + sq(i)).matrix() - 2.0 * (Y * Y.row(i).transpose());
    d(i) = std::numeric_limits<double>::infinity();
    const double m = d.minCoeff();
    double z = 0.0;
    double p_own = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double e = std::exp(-(std::max(d(j), 0.0) - std::max(m, 0.0)));
      z += e;
      if (labels[static_cast<std::size_t>(j)] == labels[iu]) p_own += e;
    }
    shift(i) = std::max(m, 0.0);
    norm(i) = z;
    own(i) = z > 0.0 ? p_own / z : 0.0;
  });
  double objective = 0.0;
  for (Index i = 0; i < n; ++i) objective += own(i);
  if (!grad) return objective;

  // Pass 2: with W_ij = p_i p_ij - [same class] p_ij, the gradient is
  // 2 Y^T (diag(colsum W) - W - W^T) X because every row of W sums to 0.
  MatrixXd M(A.rows(), n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ju) {
    const auto j = static_cast<Index>(ju);
    VectorXd d = (sq.array() + sq(j)).matrix() - 2.0 * (Y * Y.row(j).transpose());
    VectorXd col_acc = VectorXd::Zero(A.rows());
    VectorXd row_acc = VectorXd::Zero(A.rows());
    double col_sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double dij = std::max(d(i), 0.0);
      const bool same_class = labels[static_cast<std::size_t>(i)] == labels[ju];
      // Column entry W_ij uses row i's normalizer.
      const double p_ij = std::exp(-(dij - shift(i))) / norm(i);
      const double w_ij = own(i) * p_ij - (same_class ? p_ij : 0.0);
      col_sum += w_ij;
      col_acc += w_ij * Y.row(i).transpose();
      // Row entry W_ji uses row j's normalizer.
      const double p_ji = std::exp(-(dij - shift(j))) / norm(j);
      const double w_ji = own(j) * p_ji - (same_class ? p_ji : 0.0);
      row_acc += w_ji * Y.row(i).transpose();
    }
    M.col(j) = col_sum * Y.row(j).transpose() - col_acc - row_acc;
  });
  *grad = 2.0 * M * X;
  return objective;
}

NcaFit fit_nca(const features::FeatureMatrix& train, const LinearMap& init, const NcaOptions& opts) {
  if (init.A.cols() != train.values.cols()) fail("NCA init shape does not match the features");
  if (init.A.rows() > train.values.cols()) fail("n_components exceeds n_features");
  const auto y = encode_labels(train.labels);
  const MatrixXd X = train.values.rowwise() - init.center.transpose();
  const double n = static_cast<double>(train.values.rows());

  NcaFit fit;
  MatrixXd A = init.A;
  MatrixXd G;
  double f = nca_objective(A, X, y, &G);
  if (!std::isfinite(f)) fail("NCA objective is non-finite at iteration 0");
  fit.objective_trace.push_back(f);
  double step = opts.step;
  for (int it = 1; it <= opts.max_iter; ++it) {
    bool accepted = false;
    MatrixXd trial;
    double f_trial = 0.0;
    while (step > 1e-12) {
      trial = A + (step / n) * G;
      f_trial = nca_objective(trial, X, y);
      if (!std::isfinite(f_trial)) fail("NCA objective is non-finite at iteration " + std::to_string(it));
      if (f_trial > f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double rel = (f_trial - f) / std::max(std::abs(f), 1e-300);
    A = std::move(trial);
    f = nca_objective(A, X, y, &G);
    fit.objective_trace.push_back(f);
    fit.iterations = it;
    step = std::min(opts.step, 2.0 * step);
    if (rel < opts.tolerance) break;
  }
  fit.map.kind = LinearKind::nca;
  fit.map.input_columns = train.columns;
  fit.map.center = init.center;
  fit.map.A = std::move(A);
  log_info("transforms", "NCA: " + std::to_string(fit.iterations) + " iterations, objective " +
                             std::to_string(fit.objective_trace.front()) + " -> " +
                             std::to_string(f));
  return fit;
}

// --- dispatch and files ------------------------------------------------------

features::FeatureMatrix apply(const Transform& t, const features::FeatureMatrix& fm) {
  return std::visit([&](const auto& m) { return m.apply(fm); }, t);
}

void write_transform(const Transform& t, const std::filesystem::path& path) {
  io::Table table;
  table.key_names = {"row"};
  if (const auto* q = std::get_if<QuantileMap>(&t)) {
    table.preamble = {"mts-transform kind=quantile n_quantiles=" + std::to_string(q->n_quantiles) +
                      " features=" + std::to_string(q->columns.size())};
    table.value_names = q->columns;
    for (Index i = 0; i < q->landmarks.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(q->landmarks.cols()));
      for (Index c = 0; c < q->landmarks.cols(); ++c) row[static_cast<std::size_t>(c)] = q->landmarks(i, c);
      table.add_row({"q" + std::to_string(i)}, std::move(row));
    }
  } else {
    const auto& m = std::get<LinearMap>(t);
    std::string head = "mts-transform kind=" + std::string(to_string(m.kind)) +
                       " rows=" + std::to_string(m.A.rows()) + " cols=" + std::to_string(m.A.cols());
    if (m.spectrum.size() > 0) {
      head += " spectrum=";
      for (Index i = 0; i < m.spectrum.size(); ++i) {
        if (i) head += ';';
        head += io::format_double(m.spectrum(i));
      }
    }
    table.preamble = {head};
    table.value_names = m.input_columns;
    std::vector<double> center(m.center.data(), m.center.data() + m.center.size());
    table.add_row({"center"}, std::move(center));
    for (Index r = 0; r < m.A.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(m.A.cols()));
      for (Index c = 0; c < m.A.cols(); ++c) row[static_cast<std::size_t>(c)] = m.A(r, c);
      table.add_row({"a" + std::to_string(r)}, std::move(row));
    }
  }
  io::write_table(table, path);
}

Transform read_transform(const std::filesystem::path& path) {
  const io::Table t = io::read_table(path, 1);
  if (t.preamble.empty() || t.preamble[0].rfind("mts-transform", 0) != 0) {
    fail(path.string() + ": not a transform file");
  }
  std::map<std::string, std::string> meta;
  std::istringstream head(t.preamble[0]);
  std::string token;
  while (head >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) meta[token.substr(0, eq)] = token.substr(eq + 1);
  }
  const std::string kind = meta["kind"];
  const auto f = static_cast<Index>(t.value_names.size());
  if (kind == "quantile") {
    QuantileMap q;
    q.n_quantiles = std::stoi(meta["n_quantiles"]);
    q.columns = t.value_names;
    if (static_cast<int>(t.rows()) != q.n_quantiles) fail(path.string() + ": landmark row count mismatch");
    q.landmarks.resize(q.n_quantiles, f);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < f; ++c) q.landmarks(static_cast<Index>(r), c) = t.values[r][static_cast<std::size_t>(c)];
    }
    return q;
  }
  LinearMap m;
  m.kind = linear_kind_from_string(kind);
  m.input_columns = t.value_names;
  if (t.rows() < 1 || t.keys[0][0] != "center") fail(path.string() + ": missing center row");
  m.center = Eigen::Map<const VectorXd>(t.values[0].data(), f);
  const auto rows = static_cast<Index>(t.rows() - 1);
  m.A.resize(rows, f);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < f; ++c) m.A(r, c) = t.values[static_cast<std::size_t>(r + 1)][static_cast<std::size_t>(c)];
  }
  if (auto it = meta.find("spectrum"); it != meta.end()) {
    const auto parts = io::split(it->second, ';');
    m.spectrum.resize(static_cast<Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) m.spectrum(static_cast<Index>(i)) = io::parse_double(parts[i]);
  }
  return m;
}

}  // namespace mts::transforms
