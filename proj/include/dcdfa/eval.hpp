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

#ifndef DCDFA_EVAL_HPP_
#define DCDFA_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcdfa/tensor.hpp"

namespace dcdfa {

struct ImageMeta {
  int identity = 0;
  int camera = 0;
};

struct MetricsReport {
  double map = 0;  // fractions in [0, 1]
  double rank1 = 0;
  double rank5 = 0;
  double rank10 = 0;
  std::vector<double> query_ap;  // one per evaluated query, in query order
  std::size_t excluded_queries = 0;
  std::string scheme;
  std::uint64_t seed = 0;
  double seconds = 0;
};

/// Retrieval metrics for L2-normalized features; similarity is the dot
/// product. Gallery items sharing both identity and camera with the query
/// are skipped, ties rank by gallery index, and queries with no remaining
/// match are excluded and counted.
MetricsReport evaluate(const Tensor<float>& query_feats, const std::vector<ImageMeta>& query_meta,
                       const Tensor<float>& gallery_feats, const std::vector<ImageMeta>& gallery_meta);

/// Appends "scheme,seed,mAP,R1,R5,R10,seconds" (metrics as percent with two
/// decimals), writing the header when the file is new or empty.
void write_metrics(const MetricsReport& report, const std::string& path);

}  // namespace dcdfa

#endif  // DCDFA_EVAL_HPP_
