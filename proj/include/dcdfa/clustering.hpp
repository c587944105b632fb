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

#ifndef DCDFA_CLUSTERING_HPP_
#define DCDFA_CLUSTERING_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "dcdfa/tensor.hpp"

namespace dcdfa {

inline constexpr int kOutlier = -1;

struct ClusterConfig {
  double eps = 0.6;
  std::size_t min_pts = 4;
  /// When positive, eps is re-estimated from the data on every call as the
  /// mean of the smallest rho fraction of pairwise distances.
  double rho = 0;
};

/// Dense symmetric N x N matrix, row-major.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

struct PseudoLabelTable {
  std::vector<int> labels;  // cluster id in [0, num_clusters) or kOutlier
  int round = 0;
  std::size_t num_clusters = 0;
};

struct ClusterDiagnostics {
  double eps = 0;  // radius actually used
  std::size_t num_clusters = 0;
  double outlier_fraction = 0;
  /// Size-weighted majority ground-truth share over clustered samples;
  /// 0 when no ground truth was supplied.
  double purity = 0;
};

/// Cosine distance 1 - cos(u_i, u_j) between rows. Rows are normalized here,
/// so any positive row scaling gives the same matrix. A zero row is at
/// distance 1 from every other row.
DistanceMatrix pairwise_distance(const Tensor<float>& features);

/// DBSCAN with self-inclusive neighborhoods. Clusters are grown breadth
/// first from cores in index order; a border point keeps the first cluster
/// that reaches it.
PseudoLabelTable dbscan(const DistanceMatrix& dist, const ClusterConfig& config);

/// Mean of the smallest rho fraction of off-diagonal distances (at least one).
double estimate_eps(const DistanceMatrix& dist, double rho);

double cluster_purity(const PseudoLabelTable& table, const std::vector<int>& ground_truth);

/// Clusters features (expected from the teacher in eval mode). Throws when
/// every sample is an outlier. ground_truth may be empty.
PseudoLabelTable assign_pseudo_labels(const Tensor<float>& features, const ClusterConfig& config,
                                      int round, const std::vector<int>& ground_truth,
                                      ClusterDiagnostics* diagnostics = nullptr);

/// Writes "sample,cluster,identity" rows. ground_truth may be empty.
void write_pseudo_labels_csv(const std::string& path, const PseudoLabelTable& table,
                             const std::vector<int>& ground_truth);

}  // namespace dcdfa

#endif  // DCDFA_CLUSTERING_HPP_
