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

#include "dcdfa/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace dcdfa {

MetricsReport evaluate(const Tensor<float>& query_feats, const std::vector<ImageMeta>& query_meta,
                       const Tensor<float>& gallery_feats, const std::vector<ImageMeta>& gallery_meta) {
  if (query_feats.ndim() != 2 || gallery_feats.ndim() != 2 || query_feats.dim(1) != gallery_feats.dim(1)) {
    throw Error("evaluate: feature shapes " + shape_string(query_feats.shape()) + " and " +
                shape_string(gallery_feats.shape()) + " disagree");
  }
  if (query_meta.size() != query_feats.dim(0) || gallery_meta.size() != gallery_feats.dim(0)) {
    throw Error("evaluate: metadata count does not match features");
  }
  const std::size_t nq = query_meta.size(), ng = gallery_meta.size(), c = query_feats.dim(1);
  MetricsReport report;
  std::size_t hits1 = 0, hits5 = 0, hits10 = 0;
  std::vector<double> sim(ng);
  std::vector<std::size_t> order(ng);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t g = 0; g < ng; ++g) {
      double dot = 0;
      for (std::size_t k = 0; k < c; ++k) dot += double(query_feats[q * c + k]) * gallery_feats[g * c + k];
      sim[g] = dot;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });

    const ImageMeta& qm = query_meta[q];
    std::size_t rank = 0, correct = 0, first_hit = 0;
    double precision_sum = 0;
    for (std::size_t g : order) {
      const ImageMeta& gm = gallery_meta[g];
      const bool same_id = gm.identity == qm.identity;
      if (same_id && gm.camera == qm.camera) continue;
      ++rank;
      if (!same_id) continue;
      ++correct;
      if (first_hit == 0) first_hit = rank;
      precision_sum += double(correct) / double(rank);
    }
    if (correct == 0) {
      report.excluded_queries++;
      continue;
    }
    report.query_ap.push_back(precision_sum / double(correct));
    hits1 += first_hit <= 1;
    hits5 += first_hit <= 5;
    hits10 += first_hit <= 10;
  }
  const std::size_t n = report.query_ap.size();
  if (n > 0) {
    report.map = std::accumulate(report.query_ap.begin(), report.query_ap.end(), 0.0) / double(n);
    report.rank1 = double(hits1) / double(n);
    report.rank5 = double(hits5) / double(n);
    report.rank10 = double(hits10) / double(n);
  }
  return report;
}

void write_metrics(const MetricsReport& report, const std::string& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw Error("write_metrics: cannot open " + path);
  if (fresh) os << "scheme,seed,mAP,R1,R5,R10,seconds\n";
  char line[256];
  std::snprintf(line, sizeof(line), ",%.2f,%.2f,%.2f,%.2f,%.3f\n", 100.0 * report.map, 100.0 * report.rank1,
                100.0 * report.rank5, 100.0 * report.rank10, report.seconds);
  os << report.scheme << ',' << report.seed << line;
  if (!os) throw Error("write_metrics: write failed for " + path);
}

}  // namespace dcdfa
