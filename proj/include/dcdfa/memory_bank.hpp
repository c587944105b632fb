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

#ifndef DCDFA_MEMORY_BANK_HPP_
#define DCDFA_MEMORY_BANK_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "dcdfa/clustering.hpp"
#include "dcdfa/optim.hpp"

namespace dcdfa {

/// Source class prototypes followed by target instance rows. Entry ids run
/// over both: [0, K_s) are prototypes, [K_s, K_s + N_t) are target samples.
/// Labels share one key space: source class c has key c, target pseudo
/// class p has key K_s + p, and unclustered target rows have kOutlier.
struct MemoryBank {
  Tensor<float> source_prototypes;  // [K_s, C]
  Tensor<float> target_instances;   // [N_t, C]
  std::vector<int> target_pseudo;   // per target row, pseudo id or kOutlier
  double momentum = 0.2;
  bool freeze_source = false;

  std::size_t source_classes() const { return source_prototypes.dim(0); }
  std::size_t target_size() const { return target_instances.dim(0); }
  std::size_t entries() const { return source_classes() + target_size(); }
  std::size_t channels() const { return source_prototypes.dim(1); }
  std::size_t target_entry(std::size_t sample) const { return source_classes() + sample; }

  int source_key(int cls) const { return cls; }
  int target_key(int pseudo) const {
    return pseudo == kOutlier ? kOutlier : static_cast<int>(source_classes()) + pseudo;
  }

  /// All entries stacked [K_s + N_t, C] and their label keys.
  Tensor<float> stacked() const;
  std::vector<int> labels() const;
};

/// Prototypes are normalized class means of source_features, target rows the
/// normalized target features. source_labels must cover 0..K_s-1.
MemoryBank init_bank(const Tensor<float>& source_features, const std::vector<int>& source_labels,
                     std::size_t source_classes, const Tensor<float>& target_features,
                     double momentum = 0.2);

/// Keeps the stored target features and only replaces their labels.
void relabel(MemoryBank& bank, const PseudoLabelTable& table);

/// v <- normalize(mu v + (1 - mu) feature). feature is normalized first.
/// Source entries are left alone when the bank is frozen; zero features are
/// ignored.
void update(MemoryBank& bank, std::size_t entry, std::span<const float> feature);

struct BankPartition {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};

/// Splits every entry except exclude (pass -1 for none) by label key.
BankPartition lookup(const MemoryBank& bank, int label_key, long exclude = -1);

/// Named float tensors for checkpointing ("memory.source", "memory.target",
/// "memory.target_pseudo").
ParameterList<float> bank_tensors(const MemoryBank& bank);
MemoryBank bank_from_tensors(const ParameterList<float>& tensors, double momentum, bool freeze_source);

}  // namespace dcdfa

#endif  // DCDFA_MEMORY_BANK_HPP_
