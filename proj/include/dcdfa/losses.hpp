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

#ifndef DCDFA_LOSSES_HPP_
#define DCDFA_LOSSES_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dcdfa/ops.hpp"

namespace dcdfa {

/// Four features per source/target pair, batched over pairs ([N, C] each).
/// Identities: f_src and r_tgt carry the source identity, f_tgt and r_src
/// the target identity. Domains: f_src, r_src are source; f_tgt, r_tgt target.
template <typename T>
struct RecomposedSet {
  Tensor<T> f_src;
  Tensor<T> f_tgt;
  Tensor<T> r_src;
  Tensor<T> r_tgt;
};

inline constexpr double kMinTemperature = 0.05;

/// Cross-domain identity loss. For every anchor of the set there is one
/// positive and two negatives; with cosine similarities s,
///   L = 1/4 sum_m log(1 + exp(-s+_m / tau) sum_n exp(s-_mn / tau)),
/// averaged over pairs. tau is a scalar tensor and receives a gradient.
/// Per-anchor terms log(1 + e^{-pos/tau}(e^{neg1/tau} + e^{neg2/tau})) for
/// similarity vectors [N].
template <typename T>
Tensor<T> cid_anchor_terms(const Tensor<T>& pos, const Tensor<T>& neg1, const Tensor<T>& neg2,
                           const Tensor<T>& tau);

template <typename T>
Tensor<T> cid_loss(const RecomposedSet<T>& set, const Tensor<T>& tau);

/// -1/4 [log p(f_src) + log p(r_src) + log(1 - p(f_tgt)) + log(1 - p(r_tgt))],
/// averaged over pairs. Probabilities are clamped away from 0 and 1 first.
template <typename T>
Tensor<T> domain_loss(const Tensor<T>& p_f_src, const Tensor<T>& p_r_src,
                      const Tensor<T>& p_f_tgt, const Tensor<T>& p_r_tgt);

/// Batch-hard triplet loss on L2-normalized features with Euclidean distance.
/// Every label must occur at least twice and at least two labels must exist.
template <typename T>
Tensor<T> triplet_loss(const Tensor<T>& features, const std::vector<int>& labels, T margin = T(0.3));

/// Mean softmax cross-entropy of logits [B, K].
template <typename T>
Tensor<T> identity_ce_loss(const Tensor<T>& logits, const std::vector<int>& labels);

struct MemoryLossOptions {
  double temperature = 0.05;
  double circle_margin = 0.25;
  bool reweight = true;
};

struct MemoryLossStats {
  std::size_t queries = 0;
  std::size_t skipped = 0;  // outlier label or no positive entry in the bank
};

/// One query's view of the bank: its label and the entry that is the query
/// itself (excluded from everything), or -1.
struct MemoryQuery {
  int label = -1;
  long self_entry = -1;
};

/// Contrastive loss of queries against bank rows.
/// Per query: -log(sum_p exp(w_p s_p / t) / sum_all exp(w s / t)) with cosine
/// s. With reweighting, w_p = max(0, 1 + margin - s_p) and
/// w_n = max(0, s_n + margin), computed from similarity values without
/// gradient. Queries with label < 0 or without any positive are skipped and
/// counted. Returns the mean over the remaining queries, or 0 if none.
template <typename T>
Tensor<T> memory_contrastive_loss(const Tensor<T>& queries, const std::vector<MemoryQuery>& query_info,
                                  const Tensor<T>& bank, const std::vector<int>& bank_labels,
                                  const MemoryLossOptions& options, MemoryLossStats* stats = nullptr);

/// The differentiable core of memory_contrastive_loss for fixed weights:
/// sims [Q, M] (requires grad), weights [Q, M], positive/included masks.
template <typename T>
Tensor<T> weighted_contrastive_loss(const Tensor<T>& sims, const Tensor<T>& weights,
                                    const std::vector<std::vector<bool>>& positive,
                                    const std::vector<std::vector<bool>>& included, T temperature);

enum class LossTerm : std::size_t { kBReID = 0, kCID, kDomain, kRReIDb, kMemory, kCount };

inline constexpr std::array<const char*, 5> kLossTermNames{"L_BReID", "L_CID", "L_Domain",
                                                          "L_RReID_b", "L_mem"};

struct LossWeights {
  std::array<double, 5> w{1, 1, 1, 1, 1};
};

struct LossReport {
  std::array<double, 5> value{};  // unweighted, 0 for inactive terms
  double total = 0;
};

/// Weighted sum of the active terms (undefined tensors are inactive).
/// Throws naming the term if any active value is non-finite.
template <typename T>
Tensor<T> total_loss(const std::array<Tensor<T>, 5>& terms, const LossWeights& weights,
                     LossReport* report = nullptr);

}  // namespace dcdfa

#endif  // DCDFA_LOSSES_HPP_
