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

#include "dcdfa/reference.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

namespace dcdfa::reference {

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                           std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

std::vector<double> conv2d(const std::vector<double>& x, const std::vector<double>& w, const std::vector<double>& bias,
                           std::size_t batch, std::size_t channels, std::size_t height, std::size_t width,
                           std::size_t out_channels, std::size_t kh, std::size_t kw, std::size_t stride,
                           std::size_t padding) {
  const std::size_t ho = (height + 2 * padding - kh) / stride + 1;
  const std::size_t wo = (width + 2 * padding - kw) / stride + 1;
  std::vector<double> y(batch * out_channels * ho * wo, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_channels; ++o) {
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox) {
          double s = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t i = 0; i < kh; ++i) {
              for (std::size_t j = 0; j < kw; ++j) {
                const long iy = static_cast<long>(oy * stride + i) - static_cast<long>(padding);
                const long ix = static_cast<long>(ox * stride + j) - static_cast<long>(padding);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(height) || ix >= static_cast<long>(width)) continue;
                s += x[((b * channels + c) * height + static_cast<std::size_t>(iy)) * width + static_cast<std::size_t>(ix)] *
                     w[((o * channels + c) * kh + i) * kw + j];
              }
            }
          }
          y[((b * out_channels + o) * ho + oy) * wo + ox] = s;
        }
      }
    }
  }
  return y;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<int> dbscan(const DistanceMatrix& dist, double eps, std::size_t min_pts) {
  const std::size_t n = dist.n;
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) count += dist(i, j) <= eps;
    core[i] = count >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (core[i] && core[j] && dist(i, j) <= eps) {
        const std::size_t a = find_root(parent, i), b = find_root(parent, j);
        parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // Union by smaller index keeps every root at its component's smallest index.
  std::map<std::size_t, int> number;
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) number.emplace(find_root(parent, i), 0);
  }
  int next = 0;
  for (auto& [root, id] : number) id = next++;
  std::vector<int> labels(n, kOutlier);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      labels[i] = number[find_root(parent, i)];
      continue;
    }
    int best = kOutlier;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && dist(i, j) <= eps) {
        const int id = number[find_root(parent, j)];
        if (best == kOutlier || id < best) best = id;
      }
    }
    labels[i] = best;
  }
  return labels;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == kOutlier) != (b[i] == kOutlier)) return false;
    if (a[i] == kOutlier) continue;
    const auto [it1, new1] = ab.emplace(a[i], b[i]);
    const auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

MetricsReport evaluate(const std::vector<std::vector<double>>& query, const std::vector<ImageMeta>& query_meta,
                       const std::vector<std::vector<double>>& gallery, const std::vector<ImageMeta>& gallery_meta) {
  MetricsReport out;
  double ap_sum = 0;
  std::size_t r1 = 0, r5 = 0, r10 = 0;
  for (std::size_t q = 0; q < query.size(); ++q) {
    std::vector<std::tuple<double, std::size_t>> keyed;
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (gallery_meta[g].identity == query_meta[q].identity && gallery_meta[g].camera == query_meta[q].camera) continue;
      double s = 0;
      for (std::size_t k = 0; k < query[q].size(); ++k) s += query[q][k] * gallery[g][k];
      keyed.emplace_back(-s, g);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<bool> hit;
    for (const auto& [neg, g] : keyed) hit.push_back(gallery_meta[g].identity == query_meta[q].identity);
    const auto positives = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
    if (positives == 0) {
      out.excluded_queries++;
      continue;
    }
    // AP as the mean over positive positions of precision at that position.
    double ap = 0;
    for (std::size_t pos = 0; pos < hit.size(); ++pos) {
      if (!hit[pos]) continue;
      const auto found = static_cast<std::size_t>(std::count(hit.begin(), hit.begin() + static_cast<long>(pos) + 1, true));
      ap += double(found) / double(pos + 1);
    }
    ap /= double(positives);
    out.query_ap.push_back(ap);
    ap_sum += ap;
    const auto first = static_cast<std::size_t>(std::find(hit.begin(), hit.end(), true) - hit.begin()) + 1;
    r1 += first <= 1;
    r5 += first <= 5;
    r10 += first <= 10;
  }
  const double n = double(out.query_ap.size());
  if (n > 0) {
    out.map = ap_sum / n;
    out.rank1 = double(r1) / n;
    out.rank5 = double(r5) / n;
    out.rank10 = double(r10) / n;
  }
  return out;
}

}  // namespace dcdfa::reference
