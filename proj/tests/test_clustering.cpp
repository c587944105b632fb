// Copyright 2026 The DCDFA Authors
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

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "dcdfa/clustering.hpp"
#include "dcdfa/reference.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dcdfa {
namespace {

using testing::random_size;

// Points scattered around a few random unit directions.
Tensor<float> blobs(std::mt19937_64& rng, std::size_t n, std::size_t centers, std::size_t dim, double spread) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> c(centers, std::vector<double>(dim));
  for (auto& v : c) {
    for (auto& x : v) x = g(rng);
  }
  Tensor<float> out(Shape{n, dim});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& center = c[random_size(rng, 0, centers - 1)];
    for (std::size_t k = 0; k < dim; ++k) out[i * dim + k] = static_cast<float>(center[k] + spread * g(rng));
  }
  return out;
}

TEST_CASE("cosine distance anchors") {
  const Tensor<float> x(Shape{4, 2}, {1, 0, 2, 0, 0, 3, -1, 0});
  const DistanceMatrix d = pairwise_distance(x);
  CHECK(d(0, 1) == doctest::Approx(0.0));
  CHECK(d(0, 2) == doctest::Approx(1.0));
  CHECK(d(0, 3) == doctest::Approx(2.0));
  CHECK(d(2, 2) == 0);
  const DistanceMatrix z = pairwise_distance(Tensor<float>(Shape{2, 2}, {0, 0, 1, 0}));
  CHECK(z(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("dbscan basic cases") {
  SUBCASE("two separated blobs") {
    std::vector<float> v;
    for (int i = 0; i < 5; ++i) v.insert(v.end(), {1.0f, 0.01f * static_cast<float>(i)});
    for (int i = 0; i < 5; ++i) v.insert(v.end(), {0.01f * static_cast<float>(i), 1.0f});
    const auto table = dbscan(pairwise_distance(Tensor<float>(Shape{10, 2}, v)), {0.1, 4, 0});
    CHECK(table.num_clusters == 2);
    for (int l : table.labels) CHECK(l != kOutlier);
    CHECK(table.labels[0] != table.labels[9]);
  }
  SUBCASE("an isolated point is an outlier") {
    std::vector<float> v;
    for (int i = 0; i < 5; ++i) v.insert(v.end(), {1.0f, 0.01f * static_cast<float>(i)});
    v.insert(v.end(), {-1.0f, 0.0f});
    const auto table = dbscan(pairwise_distance(Tensor<float>(Shape{6, 2}, v)), {0.1, 4, 0});
    CHECK(table.labels.back() == kOutlier);
    CHECK(table.num_clusters == 1);
  }
  SUBCASE("neighborhoods include the point itself") {
    const Tensor<float> pair(Shape{2, 2}, {1, 0, 1, 0.01f});
    CHECK(dbscan(pairwise_distance(pair), {0.1, 2, 0}).num_clusters == 1);
    CHECK(dbscan(pairwise_distance(pair), {0.1, 3, 0}).num_clusters == 0);
  }
  SUBCASE("a radius covering everything gives one cluster") {
    std::mt19937_64 rng(1);
    const auto table = dbscan(pairwise_distance(blobs(rng, 30, 3, 4, 0.5)), {2.0, 4, 0});
    CHECK(table.num_clusters == 1);
    for (int l : table.labels) CHECK(l == 0);
  }
  CHECK_THROWS_AS(dbscan(DistanceMatrix{1, {0.0}}, {0.0, 4, 0}), Error);
}

TEST_CASE("dbscan matches the union-find reference") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = random_size(rng, 5, 120);
    const auto x = blobs(rng, n, random_size(rng, 1, 6), random_size(rng, 2, 8), 0.3);
    const DistanceMatrix d = pairwise_distance(x);
    const double eps = std::uniform_real_distribution<double>(0.01, 0.3)(rng);
    const std::size_t min_pts = random_size(rng, 1, 6);
    const auto got = dbscan(d, {eps, min_pts, 0});
    CHECK(reference::same_partition(got.labels, reference::dbscan(d, eps, min_pts)));
    std::set<int> ids(got.labels.begin(), got.labels.end());
    ids.erase(kOutlier);
    CHECK(ids.size() == got.num_clusters);
  }
}

TEST_CASE("dbscan is invariant to positive scaling of the features") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = blobs(rng, 60, 4, 5, 0.3);
    Tensor<float> scaled = x.clone();
    for (auto& v : scaled.values()) v *= 4.0f;
    const ClusterConfig cfg{0.05, 4, 0};
    CHECK(dbscan(pairwise_distance(x), cfg).labels == dbscan(pairwise_distance(scaled), cfg).labels);
  }
}

TEST_CASE("eps estimation") {
  // Upper-triangle distances 0.1, 0.2, 0.3, 0.4, 0.5, 0.6.
  DistanceMatrix d{4, std::vector<double>(16, 0.0)};
  const double vals[6] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  int k = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      d.values[i * 4 + j] = d.values[j * 4 + i] = vals[k++];
    }
  }
  CHECK(estimate_eps(d, 0.5) == doctest::Approx(0.2));
  CHECK(estimate_eps(d, 0.01) == doctest::Approx(0.1));
  CHECK(estimate_eps(d, 1.0) == doctest::Approx(0.35));
  CHECK_THROWS_AS(estimate_eps(d, 0.0), Error);
}

TEST_CASE("pseudo labels from perfect features") {
  const std::size_t ids = 5, per = 6;
  Tensor<float> x(Shape{ids * per, ids});
  std::vector<int> truth;
  for (std::size_t i = 0; i < ids * per; ++i) {
    x[i * ids + i % ids] = 1;
    truth.push_back(static_cast<int>(i % ids) + 100);
  }
  ClusterDiagnostics diag;
  const auto table = assign_pseudo_labels(x, {0.5, 4, 0}, 2, truth, &diag);
  CHECK(table.round == 2);
  CHECK(table.num_clusters == ids);
  CHECK(diag.purity == 1.0);
  CHECK(diag.outlier_fraction == 0.0);
  CHECK(cluster_purity(table, truth) == 1.0);

  // With rho the radius follows the data: the smallest distances are the
  // zero within-identity ones.
  const auto adaptive = assign_pseudo_labels(x, {0.5, 4, 0.05}, 1, truth, &diag);
  CHECK(adaptive.num_clusters == ids);
  CHECK(diag.eps < 0.5);

  CHECK_THROWS_AS(assign_pseudo_labels(x, {0.5, 100, 0}, 1, truth), Error);
}

TEST_CASE("purity of mixed clusters") {
  PseudoLabelTable t{{0, 0, 0, 1, 1, kOutlier}, 1, 2};
  CHECK(cluster_purity(t, {1, 1, 2, 3, 3, 9}) == doctest::Approx(0.8));
}

TEST_CASE("pseudo label csv") {
  const auto dir = std::filesystem::temp_directory_path() / "dcdfa_test_cluster";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "labels.csv").string();
  write_pseudo_labels_csv(path, {{0, kOutlier, 1}, 1, 2}, {7, 8, 9});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "sample,cluster,identity");
  std::getline(in, line);
  CHECK(line == "0,0,7");
  std::getline(in, line);
  CHECK(line == "1,-1,8");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dcdfa
