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

#include "dcdfa/clustering.hpp"

#include <cmath>
#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include "dcdfa/ops.hpp"

namespace dcdfa {

DistanceMatrix pairwise_distance(const Tensor<float>& features) {
  if (features.ndim() != 2) throw Error("pairwise_distance: expected [N, C], got " + shape_string(features.shape()));
  const std::size_t n = features.dim(0), c = features.dim(1);
  std::vector<double> unit(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (std::size_t k = 0; k < c; ++k) norm += double(features[i * c + k]) * features[i * c + k];
    norm = std::max(std::sqrt(norm), kNormFloor);
    for (std::size_t k = 0; k < c; ++k) unit[i * c + k] = features[i * c + k] / norm;
  }
  DistanceMatrix d{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < c; ++k) dot += unit[i * c + k] * unit[j * c + k];
      const double v = std::max(0.0, 1.0 - dot);
      d.values[i * n + j] = v;
      d.values[j * n + i] = v;
    }
  }
  return d;
}

PseudoLabelTable dbscan(const DistanceMatrix& dist, const ClusterConfig& config) {
  if (!(config.eps > 0) || config.min_pts < 1) throw Error("dbscan: need eps > 0 and min_pts >= 1");
  const std::size_t n = dist.n;
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dist(i, j) <= config.eps) neighbors[i].push_back(j);
    }
  }
  auto is_core = [&](std::size_t i) { return neighbors[i].size() >= config.min_pts; };

  PseudoLabelTable table;
  table.labels.assign(n, kOutlier);
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (table.labels[seed] != kOutlier || !is_core(seed)) continue;
    const int id = next++;
    table.labels[seed] = id;
    std::deque<std::size_t> frontier{seed};
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      for (std::size_t q : neighbors[p]) {
        if (table.labels[q] != kOutlier) continue;
        table.labels[q] = id;
        if (is_core(q)) frontier.push_back(q);
      }
    }
  }
  table.num_clusters = static_cast<std::size_t>(next);
  return table;
}

double estimate_eps(const DistanceMatrix& dist, double rho) {
  if (!(rho > 0) || rho > 1) throw Error("estimate_eps: rho must lie in (0, 1]");
  std::vector<double> upper;
  upper.reserve(dist.n * (dist.n - 1) / 2);
  for (std::size_t i = 0; i < dist.n; ++i) {
    for (std::size_t j = i + 1; j < dist.n; ++j) upper.push_back(dist(i, j));
  }
  if (upper.empty()) throw Error("estimate_eps: need at least two samples");
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(rho * static_cast<double>(upper.size())));
  std::nth_element(upper.begin(), upper.begin() + static_cast<long>(k - 1), upper.end());
  std::sort(upper.begin(), upper.begin() + static_cast<long>(k));
  double sum = 0;
  for (std::size_t i = 0; i < k; ++i) sum += upper[i];
  // Keep eps strictly positive for duplicate-only inputs.
  return std::max(sum / static_cast<double>(k), 1e-12);
}

double cluster_purity(const PseudoLabelTable& table, const std::vector<int>& ground_truth) {
  if (ground_truth.size() != table.labels.size()) throw Error("cluster_purity: label count mismatch");
  std::vector<std::map<int, std::size_t>> votes(table.num_clusters);
  std::size_t clustered = 0;
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    if (table.labels[i] == kOutlier) continue;
    votes[table.labels[i]][ground_truth[i]]++;
    clustered++;
  }
  if (clustered == 0) return 0;
  std::size_t majority = 0;
  for (const auto& v : votes) {
    std::size_t best = 0;
    for (const auto& [id, count] : v) best = std::max(best, count);
    majority += best;
  }
  return double(majority) / double(clustered);
}

PseudoLabelTable assign_pseudo_labels(const Tensor<float>& features, const ClusterConfig& config,
                                      int round, const std::vector<int>& ground_truth,
                                      ClusterDiagnostics* diagnostics) {
  const DistanceMatrix dist = pairwise_distance(features);
  ClusterConfig used = config;
  if (config.rho > 0) used.eps = estimate_eps(dist, config.rho);
  PseudoLabelTable table = dbscan(dist, used);
  table.round = round;
  if (table.num_clusters == 0) {
    throw Error("assign_pseudo_labels: round " + std::to_string(round) + " produced no clusters (" +
                std::to_string(table.labels.size()) + " outliers at eps " + std::to_string(used.eps) +
                ", min_pts " + std::to_string(used.min_pts) + ")");
  }
  if (diagnostics) {
    std::size_t outliers = 0;
    for (int l : table.labels) outliers += l == kOutlier;
    diagnostics->eps = used.eps;
    diagnostics->num_clusters = table.num_clusters;
    diagnostics->outlier_fraction = double(outliers) / double(table.labels.size());
    diagnostics->purity = ground_truth.empty() ? 0.0 : cluster_purity(table, ground_truth);
  }
  return table;
}

void write_pseudo_labels_csv(const std::string& path, const PseudoLabelTable& table,
                             const std::vector<int>& ground_truth) {
  std::ofstream os(path);
  if (!os) throw Error("write_pseudo_labels_csv: cannot open " + path);
  os << "sample,cluster,identity\n";
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    os << i << ',' << table.labels[i] << ',';
    if (!ground_truth.empty()) os << ground_truth[i];
    os << '\n';
  }
  if (!os) throw Error("write_pseudo_labels_csv: write failed for " + path);
}

}  // namespace dcdfa
