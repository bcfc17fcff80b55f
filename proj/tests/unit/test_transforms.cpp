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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mts/transforms.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace mts;
using namespace mts::transforms;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using features::FeatureMatrix;

namespace {

FeatureMatrix from_values(const MatrixXd& v, std::vector<std::string> labels = {}) {
  FeatureMatrix fm;
  fm.values = v;
  for (Eigen::Index c = 0; c < v.cols(); ++c) fm.columns.push_back("f" + std::to_string(c));
  for (Eigen::Index r = 0; r < v.rows(); ++r) fm.sample_ids.push_back("s" + std::to_string(r));
  if (labels.empty()) labels.assign(static_cast<std::size_t>(v.rows()), "a");
  fm.labels = std::move(labels);
  return fm;
}

MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
std::vector<double> jacobi_eigenvalues(MatrixXd a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        MatrixXd J = MatrixXd::Identity(n, n);
        J(p, p) = c, J(q, q) = c, J(p, q) = s, J(q, p) = -s;
        a = J.transpose() * a * J;
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

}  // namespace

TEST_CASE("quantile map examples") {
  MatrixXd v(1000, 1);
  for (int i = 0; i < 1000; ++i) v(i, 0) = i + 1;
  const auto qm = fit_quantile(from_values(v), 1000);
  CHECK(qm.apply_value(0, 500.5) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(qm.apply_value(0, -3.0) == 0.0);
  CHECK(qm.apply_value(0, 1e6) == 1.0);
  CHECK_THROWS_AS(fit_quantile(from_values(v), 1), Error);
}

TEST_CASE("transformed training column passes a KS uniformity check") {
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> ln(0.0, 1.5);
  MatrixXd v(1000, 1);
  for (int i = 0; i < 1000; ++i) v(i, 0) = ln(rng);
  const auto fm = from_values(v);
  auto u = fit_quantile(fm, 1000).apply(fm).values.col(0);
  std::vector<double> s(u.data(), u.data() + u.size());
  std::sort(s.begin(), s.end());
  double d = 0.0;
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - s[i], s[i] - static_cast<double>(i) / n});
  }
  // Asymptotic critical value at alpha = 0.01.
  CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("quantile map is monotone with outputs in [0, 1]") {
  std::mt19937_64 rng(3);
  MatrixXd v = gaussian(rng, 200, 3);
  for (int i = 0; i < 200; i += 3) v(i, 1) = 0.25;  // ties
  const auto qm = fit_quantile(from_values(v), 50);
  for (std::size_t f = 0; f < 3; ++f) {
    double prev = -1.0;
    for (double x = -5.0; x <= 5.0; x += 0.01) {
      const double y = qm.apply_value(f, x);
      CHECK(y >= prev);
      CHECK((y >= 0.0 && y <= 1.0));
      prev = y;
    }
  }
}

TEST_CASE("standardize uses training statistics") {
  std::mt19937_64 rng(4);
  MatrixXd v = gaussian(rng, 50, 3) * 4.0;
  v.col(1).array() += 100.0;
  v.col(2).setConstant(7.0);
  const auto fm = from_values(v);
  const auto m = fit_standardize(fm);
  const auto out = m.apply(fm).values;
  for (Eigen::Index c = 0; c < 2; ++c) {
    CHECK(std::abs(out.col(c).mean()) < 1e-9);
    CHECK(std::sqrt((out.col(c).array() - out.col(c).mean()).square().mean()) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK((out.col(2).array() == 0.0).all());
  VectorXd held(3);
  held << v.col(0).mean(), 1000.0, 7.0;
  const VectorXd y = m.apply(held);
  CHECK(std::abs(y(0)) < 1e-9);
  CHECK(y(1) > 10.0);
}

TEST_CASE("PCA on the line y = x") {
  MatrixXd v(30, 2);
  for (int i = 0; i < 30; ++i) v(i, 0) = v(i, 1) = 0.3 * i - 2.0;
  const auto m = fit_pca(from_values(v), 2);
  const double total = m.spectrum.sum();
  CHECK(m.spectrum(0) / total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.A(0, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(m.A(0, 1) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("PCA with every component reconstructs exactly") {
  std::mt19937_64 rng(5);
  const MatrixXd v = gaussian(rng, 20, 5);
  const auto m = fit_pca(from_values(v), 5);
  const MatrixXd y = m.apply(from_values(v)).values;
  const MatrixXd back = (y * m.A).rowwise() + m.center.transpose();
  CHECK((back - v).cwiseAbs().maxCoeff() < 1e-8);
  // Sign convention: largest-magnitude coordinate positive.
  for (Eigen::Index r = 0; r < m.A.rows(); ++r) {
    Eigen::Index arg;
    m.A.row(r).cwiseAbs().maxCoeff(&arg);
    CHECK(m.A(r, arg) > 0.0);
  }
  CHECK_THROWS_AS(fit_pca(from_values(v), 6), Error);
}

TEST_CASE("PCA eigenvalues match a Jacobi eigensolve") {
  std::mt19937_64 rng(6);
  const MatrixXd v = gaussian(rng, 20, 5);
  const MatrixXd c = v.rowwise() - v.colwise().mean();
  const MatrixXd cov = c.transpose() * c / 19.0;
  const auto oracle = jacobi_eigenvalues(cov);
  const auto m = fit_pca(from_values(v), 5);
  for (int k = 0; k < 5; ++k) CHECK(m.spectrum(k) == doctest::Approx(oracle[static_cast<std::size_t>(k)]).epsilon(1e-9));
  for (int k = 1; k < 5; ++k) CHECK(m.spectrum(k) <= m.spectrum(k - 1));
}

TEST_CASE("LDA direction is parallel to the mean difference for spherical classes") {
  // Eight points on a circle around each mean: the within scatter is exactly isotropic.
  MatrixXd v(16, 2);
  std::vector<std::string> labels;
  const VectorXd m0 = (VectorXd(2) << 0.0, 0.0).finished();
  const VectorXd m1 = (VectorXd(2) << 6.0, 2.5).finished();
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * M_PI * i / 8.0;
    v.row(i) = (m0 + VectorXd::Unit(2, 0) * std::cos(a) + VectorXd::Unit(2, 1) * std::sin(a)).transpose();
    v.row(8 + i) = (m1 + VectorXd::Unit(2, 0) * std::cos(a) + VectorXd::Unit(2, 1) * std::sin(a)).transpose();
    labels.push_back("a");
  }
  for (int i = 0; i < 8; ++i) labels.push_back("b");
  const auto fit = fit_lda(from_values(v, labels), 1);
  const VectorXd w = fit.map.A.row(0).transpose();
  const VectorXd d = m1 - m0;
  CHECK(std::abs(w.dot(d)) / (w.norm() * d.norm()) >= 0.999);
  CHECK_FALSE(fit.degenerate);
  CHECK_THROWS_AS(fit_lda(from_values(v, labels), 2), Error);
}

TEST_CASE("LDA flags equal class means") {
  MatrixXd v(8, 2);
  v << 1, 0, -1, 0, 0, 1, 0, -1, 2, 0, -2, 0, 0, 2, 0, -2;
  const auto fit = fit_lda(from_values(v, {"a", "a", "a", "a", "b", "b", "b", "b"}), 1);
  CHECK(fit.degenerate);
  CHECK(fit.map.A.allFinite());
}

TEST_CASE("LDA needs two samples per class") {
  MatrixXd v(3, 2);
  v << 0, 0, 1, 1, 2, 2;
  CHECK_THROWS_AS(fit_lda(from_values(v, {"a", "a", "b"}), 1), Error);
}

TEST_CASE("LDA projection beats random projections") {
  std::mt19937_64 rng(7);
  MatrixXd v = gaussian(rng, 90, 4);
  std::vector<std::string> labels;
  std::vector<int> y;
  for (int i = 0; i < 90; ++i) {
    const int c = i % 3;
    v(i, 0) += 1.5 * c;
    v(i, 2) -= 0.8 * c;
    v.row(i) *= 1.0 + 0.5 * (i % 2);
    labels.push_back(std::string(1, static_cast<char>('a' + c)));
    y.push_back(c);
  }
  const auto fit = fit_lda(from_values(v, labels), 1);
  const double lda = testing::fisher_ratio(v, y, fit.map.A.row(0).transpose());
  for (int t = 0; t < 100; ++t) {
    const VectorXd w = gaussian(rng, 4, 1).col(0);
    CHECK(lda >= testing::fisher_ratio(v, y, w));
  }
}

TEST_CASE("NCA gradient matches central finite differences") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd X = gaussian(rng, 12, 4);
    std::vector<int> y;
    for (int i = 0; i < 12; ++i) y.push_back(i % 3);
    const MatrixXd A = gaussian(rng, 2, 4) * 0.7;
    MatrixXd G;
    nca_objective(A, X, y, &G);
    MatrixXd fd(2, 4);
    const double h = 1e-6;
    for (Eigen::Index r = 0; r < 2; ++r) {
      for (Eigen::Index c = 0; c < 4; ++c) {
        MatrixXd ap = A, am = A;
        ap(r, c) += h;
        am(r, c) -= h;
        fd(r, c) = (nca_objective(ap, X, y) - nca_objective(am, X, y)) / (2.0 * h);
      }
    }
    CHECK((G - fd).norm() / fd.norm() < 1e-4);
  }
}

TEST_CASE("NCA objective is invariant under rotation") {
  std::mt19937_64 rng(11);
  const MatrixXd X = gaussian(rng, 15, 5);
  std::vector<int> y;
  for (int i = 0; i < 15; ++i) y.push_back(i % 2);
  const MatrixXd A = gaussian(rng, 3, 5);
  const Eigen::HouseholderQR<MatrixXd> qr(gaussian(rng, 3, 3));
  const MatrixXd Q = qr.householderQ();
  CHECK(nca_objective(Q * A, X, y) == doctest::Approx(nca_objective(A, X, y)).epsilon(1e-9));
}

TEST_CASE("NCA never decreases the objective and helps leave-one-out kNN") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  // Two separable classes along feature 0 plus loud noise features.
  MatrixXd v(60, 6);
  std::vector<std::string> labels;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    const int c = i % 2;
    v(i, 0) = (c ? 1.0 : -1.0) + 0.3 * g(rng);
    for (int f = 1; f < 6; ++f) v(i, f) = 3.0 * g(rng);
    labels.push_back(c ? "b" : "a");
    y.push_back(c);
  }
  auto fm = from_values(v, labels);
  fm = fit_standardize(fm).apply(fm);
  LinearMap init;
  init.kind = LinearKind::nca;
  init.input_columns = fm.columns;
  init.center = VectorXd::Zero(6);
  init.A = MatrixXd::Identity(6, 6);
  const auto fit = fit_nca(fm, init);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    CHECK(fit.objective_trace[i] > fit.objective_trace[i - 1]);
  }
  const double before = testing::loo_knn_accuracy(fm.values, y, 5);
  const double after = testing::loo_knn_accuracy(fit.map.apply(fm).values, y, 5);
  CHECK(after >= before);
}

TEST_CASE("transform files round trip") {
  std::mt19937_64 rng(13);
  const MatrixXd v = gaussian(rng, 40, 4);
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 2 ? "x" : "y");
  const auto fm = from_values(v, labels);
  testing::TempDir dir;
  const std::vector<Transform> all = {fit_quantile(fm, 17), fit_standardize(fm), fit_pca(fm, 3),
                                      fit_lda(fm, 1).map};
  for (const auto& t : all) {
    write_transform(t, dir / "t.csv");
    const auto back = read_transform(dir / "t.csv");
    CHECK(back.index() == t.index());
    if (t.index() == 0) {
      CHECK(std::get<QuantileMap>(back) == std::get<QuantileMap>(t));
    } else {
      CHECK(std::get<LinearMap>(back) == std::get<LinearMap>(t));
    }
    CHECK(apply(back, fm).values == apply(t, fm).values);
  }
}

TEST_CASE("applying to mismatched columns fails") {
  std::mt19937_64 rng(14);
  auto fm = from_values(gaussian(rng, 10, 3));
  const auto m = fit_standardize(fm);
  fm.columns[1] = "other";
  CHECK_THROWS_AS(m.apply(fm), Error);
}
