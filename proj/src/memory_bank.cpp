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

#include "dcdfa/memory_bank.hpp"

#include <algorithm>
#include <cmath>

namespace dcdfa {
namespace {

// Normalizes v in place; returns false for a zero vector.
bool normalize(std::span<float> v) {
  double norm = 0;
  for (float x : v) norm += double(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0) return false;
  for (float& x : v) x = static_cast<float>(x / norm);
  return true;
}

const Tensor<float>& find(const ParameterList<float>& tensors, const std::string& name) {
  for (const auto& p : tensors) {
    if (p.name == name) return p.value;
  }
  throw Error("memory bank: checkpoint lacks " + name);
}

}  // namespace

Tensor<float> MemoryBank::stacked() const {
  const std::size_t c = channels();
  Tensor<float> out(Shape{entries(), c});
  std::copy(source_prototypes.values().begin(), source_prototypes.values().end(), out.values().begin());
  std::copy(target_instances.values().begin(), target_instances.values().end(),
            out.values().begin() + static_cast<long>(source_classes() * c));
  return out;
}

std::vector<int> MemoryBank::labels() const {
  std::vector<int> out(entries());
  for (std::size_t k = 0; k < source_classes(); ++k) out[k] = source_key(static_cast<int>(k));
  for (std::size_t i = 0; i < target_size(); ++i) out[target_entry(i)] = target_key(target_pseudo[i]);
  return out;
}

MemoryBank init_bank(const Tensor<float>& source_features, const std::vector<int>& source_labels,
                     std::size_t source_classes, const Tensor<float>& target_features,
                     double momentum) {
  if (source_features.ndim() != 2 || target_features.ndim() != 2 ||
      source_features.dim(1) != target_features.dim(1)) {
    throw Error("init_bank: feature shapes " + shape_string(source_features.shape()) + " and " +
                shape_string(target_features.shape()) + " disagree");
  }
  if (source_labels.size() != source_features.dim(0)) throw Error("init_bank: source label count mismatch");
  const std::size_t c = source_features.dim(1);
  MemoryBank bank;
  bank.momentum = momentum;
  bank.source_prototypes = Tensor<float>(Shape{source_classes, c});
  std::vector<double> acc(source_classes * c, 0.0);
  std::vector<std::size_t> counts(source_classes, 0);
  for (std::size_t i = 0; i < source_labels.size(); ++i) {
    const int k = source_labels[i];
    if (k < 0 || static_cast<std::size_t>(k) >= source_classes) {
      throw Error("init_bank: source label " + std::to_string(k) + " outside [0, " +
                  std::to_string(source_classes) + ")");
    }
    counts[k]++;
    for (std::size_t j = 0; j < c; ++j) acc[k * c + j] += source_features[i * c + j];
  }
  for (std::size_t k = 0; k < source_classes; ++k) {
    if (counts[k] == 0) throw Error("init_bank: source class " + std::to_string(k) + " has no samples");
    auto row = bank.source_prototypes.data().subspan(k * c, c);
    for (std::size_t j = 0; j < c; ++j) row[j] = static_cast<float>(acc[k * c + j] / double(counts[k]));
    normalize(row);  // a dead (all-zero) feature stays zero until updated
  }
  bank.target_instances = target_features.clone();
  for (std::size_t i = 0; i < target_features.dim(0); ++i) {
    normalize(bank.target_instances.data().subspan(i * c, c));
  }
  bank.target_pseudo.assign(target_features.dim(0), kOutlier);
  return bank;
}

void relabel(MemoryBank& bank, const PseudoLabelTable& table) {
  if (table.labels.size() != bank.target_size()) {
    throw Error("relabel: " + std::to_string(table.labels.size()) + " labels for " +
                std::to_string(bank.target_size()) + " target rows");
  }
  bank.target_pseudo = table.labels;
}

void update(MemoryBank& bank, std::size_t entry, std::span<const float> feature) {
  if (entry >= bank.entries()) throw Error("memory bank: unknown entry " + std::to_string(entry));
  const std::size_t c = bank.channels();
  if (feature.size() != c) throw Error("memory bank: feature width mismatch");
  const bool is_source = entry < bank.source_classes();
  if (is_source && bank.freeze_source) return;
  std::span<float> row = is_source ? bank.source_prototypes.data().subspan(entry * c, c)
                                   : bank.target_instances.data().subspan((entry - bank.source_classes()) * c, c);
  std::vector<float> fresh(feature.begin(), feature.end());
  if (!normalize(fresh)) return;  // a zero feature carries no direction
  const double mu = bank.momentum;
  std::vector<float> mixed(c);
  for (std::size_t j = 0; j < c; ++j) mixed[j] = static_cast<float>(mu * row[j] + (1.0 - mu) * fresh[j]);
  // Exactly opposite vectors at mu = 0.5 cancel; fall back to the new feature.
  if (!normalize(mixed)) mixed = fresh;
  std::copy(mixed.begin(), mixed.end(), row.begin());
}

BankPartition lookup(const MemoryBank& bank, int label_key, long exclude) {
  BankPartition out;
  const std::vector<int> keys = bank.labels();
  for (std::size_t j = 0; j < keys.size(); ++j) {
    if (static_cast<long>(j) == exclude) continue;
    if (label_key != kOutlier && keys[j] == label_key) {
      out.positives.push_back(j);
    } else {
      out.negatives.push_back(j);
    }
  }
  return out;
}

ParameterList<float> bank_tensors(const MemoryBank& bank) {
  Tensor<float> pseudo(Shape{bank.target_size()});
  for (std::size_t i = 0; i < bank.target_size(); ++i) pseudo[i] = static_cast<float>(bank.target_pseudo[i]);
  return {{"memory.source", bank.source_prototypes},
          {"memory.target", bank.target_instances},
          {"memory.target_pseudo", pseudo}};
}

MemoryBank bank_from_tensors(const ParameterList<float>& tensors, double momentum, bool freeze_source) {
  MemoryBank bank;
  bank.source_prototypes = find(tensors, "memory.source").clone();
  bank.target_instances = find(tensors, "memory.target").clone();
  const Tensor<float>& pseudo = find(tensors, "memory.target_pseudo");
  if (pseudo.numel() != bank.target_size()) throw Error("memory bank: pseudo label count mismatch in checkpoint");
  for (float v : pseudo.values()) bank.target_pseudo.push_back(static_cast<int>(v));
  bank.momentum = momentum;
  bank.freeze_source = freeze_source;
  return bank;
}

}  // namespace dcdfa
