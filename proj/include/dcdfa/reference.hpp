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

#ifndef DCDFA_REFERENCE_HPP_
#define DCDFA_REFERENCE_HPP_

#include <cstddef>
#include <vector>

#include "dcdfa/clustering.hpp"
#include "dcdfa/eval.hpp"

/// Deliberately naive implementations used as oracles by the self-test and
/// the test suites. They share no code with the optimized paths.
namespace dcdfa::reference {

/// c[m x n] = a[m x k] b[k x n] with triple loops in double.
std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                           std::size_t k, std::size_t n);

/// Direct convolution, x [B, C, H, W], w [O, C, KH, KW], optional bias [O].
std::vector<double> conv2d(const std::vector<double>& x, const std::vector<double>& w, const std::vector<double>& bias,
                           std::size_t batch, std::size_t channels, std::size_t height, std::size_t width,
                           std::size_t out_channels, std::size_t kh, std::size_t kw, std::size_t stride,
                           std::size_t padding);

/// DBSCAN via union-find over core-core edges within eps. Components are
/// numbered by their smallest core index; a border point takes the adjacent
/// component with the smallest number.
std::vector<int> dbscan(const DistanceMatrix& dist, double eps, std::size_t min_pts);

/// True when a and b agree up to a bijective renaming of non-outlier ids and
/// mark the same points as outliers.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

/// Full ranking per query with an explicit sort key (similarity, index) and
/// the textbook AP / CMC definitions.
MetricsReport evaluate(const std::vector<std::vector<double>>& query, const std::vector<ImageMeta>& query_meta,
                       const std::vector<std::vector<double>>& gallery, const std::vector<ImageMeta>& gallery_meta);

}  // namespace dcdfa::reference

#endif  // DCDFA_REFERENCE_HPP_
