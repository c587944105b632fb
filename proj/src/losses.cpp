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

#include "dcdfa/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dcdfa {
namespace {

// Probability clamp for log terms. 1 - 1e-12 is not representable in float,
// so the float path uses machine epsilon instead.
template <typename T>
constexpr T prob_eps() {
  return std::max<T>(static_cast<T>(1e-12), std::numeric_limits<T>::epsilon());
}

template <typename T>
constexpr T masked_logit() {
  return static_cast<T>(-1e30);
}

}  // namespace

template <typename T>
Tensor<T> cid_anchor_terms(const Tensor<T>& pos, const Tensor<T>& neg1, const Tensor<T>& neg2,
                           const Tensor<T>& tau) {
  if (pos.ndim() != 1 || neg1.shape() != pos.shape() || neg2.shape() != pos.shape()) {
    throw Error("cid_anchor_terms: similarities must share one [N] shape");
  }
  // log(1 + e^{-p/t}(e^{n1/t} + e^{n2/t})) = logsumexp(0, (n1-p)/t, (n2-p)/t)
  const Tensor<T> zero(Shape{pos.dim(0)});
  return logsumexp_rows(concat_cols<T>({zero, (neg1 - pos) / tau, (neg2 - pos) / tau}));
}

template <typename T>
Tensor<T> cid_loss(const RecomposedSet<T>& set, const Tensor<T>& tau) {
  const Shape& s = set.f_src.shape();
  if (set.f_tgt.shape() != s || set.r_src.shape() != s || set.r_tgt.shape() != s || s.size() != 2) {
    throw Error("cid_loss: the four features must share one [N, C] shape, got " + shape_string(s));
  }
  if (tau.numel() != 1) throw Error("cid_loss: temperature must be a scalar");
  const Tensor<T> fs = l2_normalize_rows(set.f_src);
  const Tensor<T> ft = l2_normalize_rows(set.f_tgt);
  const Tensor<T> rs = l2_normalize_rows(set.r_src);
  const Tensor<T> rt = l2_normalize_rows(set.r_tgt);
  auto cos = [](const Tensor<T>& a, const Tensor<T>& b) { return sum_rows(a * b); };
  const Tensor<T> pos_i = cos(fs, rt);   // identity i: f_src ~ r_tgt
  const Tensor<T> pos_j = cos(ft, rs);   // identity j: f_tgt ~ r_src
  const Tensor<T> fs_ft = cos(fs, ft);
  const Tensor<T> fs_rs = cos(fs, rs);
  const Tensor<T> ft_rt = cos(ft, rt);
  const Tensor<T> rs_rt = cos(rs, rt);

  auto anchor = [&](const Tensor<T>& pos, const Tensor<T>& neg1, const Tensor<T>& neg2) {
    return cid_anchor_terms(pos, neg1, neg2, tau);
  };
  const Tensor<T> per_pair = anchor(pos_i, fs_ft, fs_rs) + anchor(pos_j, fs_ft, ft_rt) +
                             anchor(pos_j, fs_rs, rs_rt) + anchor(pos_i, ft_rt, rs_rt);
  return mean(per_pair) * T(0.25);
}

template <typename T>
Tensor<T> domain_loss(const Tensor<T>& p_f_src, const Tensor<T>& p_r_src,
                      const Tensor<T>& p_f_tgt, const Tensor<T>& p_r_tgt) {
  const T lo = prob_eps<T>(), hi = T(1) - prob_eps<T>();
  auto logp = [&](const Tensor<T>& p) { return log(clamp(p, lo, hi)); };
  auto log1mp = [&](const Tensor<T>& p) { return log(rsub(T(1), clamp(p, lo, hi))); };
  const Tensor<T> s = logp(p_f_src) + logp(p_r_src) + log1mp(p_f_tgt) + log1mp(p_r_tgt);
  return mean(s) * T(-0.25);
}

template <typename T>
Tensor<T> triplet_loss(const Tensor<T>& features, const std::vector<int>& labels, T margin) {
  if (features.ndim() != 2 || features.dim(0) != labels.size()) {
    throw Error("triplet_loss: " + std::to_string(labels.size()) + " labels for features " +
                shape_string(features.shape()));
  }
  const std::size_t n = labels.size();
  std::map<int, std::size_t> counts;
  for (int l : labels) counts[l]++;
  if (counts.size() < 2) throw Error("triplet_loss: batch needs at least two distinct labels");
  for (const auto& [label, c] : counts) {
    if (c < 2) throw Error("triplet_loss: label " + std::to_string(label) + " appears once in the batch");
  }
  const Tensor<T> x = l2_normalize_rows(features);
  // ||a - b||^2 = 2 - 2 <a, b> for unit vectors.
  const Tensor<T> d2 = rsub(T(2), matmul(x, transpose(x)) * T(2));
  const Tensor<T> dist = sqrt(clamp(d2, static_cast<T>(1e-12), std::numeric_limits<T>::max()));

  std::vector<std::size_t> hard_pos(n), hard_neg(n);
  for (std::size_t i = 0; i < n; ++i) {
    T best_pos = -1, best_neg = std::numeric_limits<T>::max();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const T d = dist[i * n + j];
      if (labels[j] == labels[i]) {
        if (d > best_pos) { best_pos = d; hard_pos[i] = i * n + j; }
      } else if (d < best_neg) {
        best_neg = d;
        hard_neg[i] = i * n + j;
      }
    }
  }
  return mean(relu(gather(dist, hard_pos) - gather(dist, hard_neg) + margin));
}

template <typename T>
Tensor<T> identity_ce_loss(const Tensor<T>& logits, const std::vector<int>& labels) {
  if (logits.ndim() != 2 || logits.dim(0) != labels.size()) {
    throw Error("identity_ce_loss: " + std::to_string(labels.size()) + " labels for logits " +
                shape_string(logits.shape()));
  }
  const std::size_t k = logits.dim(1);
  std::vector<std::size_t> picks(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw Error("identity_ce_loss: label " + std::to_string(labels[i]) + " outside [0, " +
                  std::to_string(k) + ")");
    }
    picks[i] = i * k + static_cast<std::size_t>(labels[i]);
  }
  return mean(logsumexp_rows(logits) - gather(logits, picks));
}

template <typename T>
Tensor<T> weighted_contrastive_loss(const Tensor<T>& sims, const Tensor<T>& weights,
                                    const std::vector<std::vector<bool>>& positive,
                                    const std::vector<std::vector<bool>>& included, T temperature) {
  const std::size_t q = sims.dim(0), m = sims.dim(1);
  Tensor<T> pos_mask(Shape{q, m}), all_mask(Shape{q, m});
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      pos_mask[i * m + j] = positive[i][j] ? T(0) : masked_logit<T>();
      all_mask[i * m + j] = included[i][j] ? T(0) : masked_logit<T>();
    }
  }
  const Tensor<T> z = sims * weights / temperature;
  return mean(logsumexp_rows(z + all_mask) - logsumexp_rows(z + pos_mask));
}

template <typename T>
Tensor<T> memory_contrastive_loss(const Tensor<T>& queries, const std::vector<MemoryQuery>& info,
                                  const Tensor<T>& bank, const std::vector<int>& bank_labels,
                                  const MemoryLossOptions& options, MemoryLossStats* stats) {
  if (bank.ndim() != 2 || bank.dim(0) == 0) throw Error("memory_contrastive_loss: empty bank");
  if (bank.dim(0) != bank_labels.size()) throw Error("memory_contrastive_loss: bank label count mismatch");
  if (queries.ndim() != 2 || queries.dim(0) != info.size() || queries.dim(1) != bank.dim(1)) {
    throw Error("memory_contrastive_loss: queries " + shape_string(queries.shape()) +
                " do not match bank " + shape_string(bank.shape()));
  }
  const std::size_t m = bank.dim(0);
  std::vector<std::size_t> rows;
  std::vector<std::vector<bool>> positive, included;
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i].label < 0) {
      if (stats) stats->skipped++;
      continue;
    }
    std::vector<bool> pos(m, false), inc(m, true);
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (static_cast<long>(j) == info[i].self_entry) {
        inc[j] = false;
        continue;
      }
      if (bank_labels[j] == info[i].label) {
        pos[j] = true;
        any = true;
      }
    }
    if (!any) {
      if (stats) stats->skipped++;
      continue;
    }
    rows.push_back(i);
    positive.push_back(std::move(pos));
    included.push_back(std::move(inc));
  }
  if (stats) stats->queries += rows.size();
  if (rows.empty()) return Tensor<T>::scalar(T(0));

  const Tensor<T> q = l2_normalize_rows(index_rows(queries, rows));
  const Tensor<T> sims = matmul(q, transpose(bank));
  Tensor<T> weights(sims.shape(), T(1));
  if (options.reweight) {
    const T margin = static_cast<T>(options.circle_margin);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const T s = sims[i * m + j];
        weights[i * m + j] = positive[i][j] ? std::max(T(0), T(1) + margin - s)
                                            : std::max(T(0), s + margin);
      }
    }
  }
  return weighted_contrastive_loss(sims, weights, positive, included,
                                   static_cast<T>(options.temperature));
}

template <typename T>
Tensor<T> total_loss(const std::array<Tensor<T>, 5>& terms, const LossWeights& weights,
                     LossReport* report) {
  Tensor<T> total;
  LossReport r;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i].defined()) continue;
    const double v = static_cast<double>(terms[i].item());
    if (!std::isfinite(v)) throw Error(std::string("total_loss: non-finite ") + kLossTermNames[i]);
    r.value[i] = v;
    if (weights.w[i] == 0.0) continue;
    const Tensor<T> scaled = terms[i] * static_cast<T>(weights.w[i]);
    total = total.defined() ? total + scaled : scaled;
    r.total += weights.w[i] * v;
  }
  if (!total.defined()) total = Tensor<T>::scalar(T(0));
  if (report) *report = r;
  return total;
}

#define DCDFA_INSTANTIATE_LOSSES(T)                                                               \
  template Tensor<T> cid_anchor_terms(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> cid_loss(const RecomposedSet<T>&, const Tensor<T>&);                        \
  template Tensor<T> domain_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                 const Tensor<T>&);                                              \
  template Tensor<T> triplet_loss(const Tensor<T>&, const std::vector<int>&, T);                 \
  template Tensor<T> identity_ce_loss(const Tensor<T>&, const std::vector<int>&);                \
  template Tensor<T> weighted_contrastive_loss(const Tensor<T>&, const Tensor<T>&,               \
                                               const std::vector<std::vector<bool>>&,            \
                                               const std::vector<std::vector<bool>>&, T);        \
  template Tensor<T> memory_contrastive_loss(const Tensor<T>&, const std::vector<MemoryQuery>&,  \
                                             const Tensor<T>&, const std::vector<int>&,          \
                                             const MemoryLossOptions&, MemoryLossStats*);        \
  template Tensor<T> total_loss(const std::array<Tensor<T>, 5>&, const LossWeights&, LossReport*);

DCDFA_INSTANTIATE_LOSSES(float)
DCDFA_INSTANTIATE_LOSSES(double)

#undef DCDFA_INSTANTIATE_LOSSES

}  // namespace dcdfa
