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

#include <cmath>
#include <random>

#include "dcdfa/memory_bank.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dcdfa {
namespace {

using testing::random_size;
using testing::random_tensor;

double row_norm(std::span<const float> v) {
  double s = 0;
  for (float x : v) s += double(x) * x;
  return std::sqrt(s);
}

MemoryBank small_bank(double momentum = 0.2) {
  // Two source classes, three target samples, C = 2.
  const Tensor<float> src(Shape{4, 2}, {1, 0, 0, 1, 3, 3, 3, 3});
  const Tensor<float> tgt(Shape{3, 2}, {2, 0, 0, 5, 1, 1});
  return init_bank(src, {0, 0, 1, 1}, 2, tgt, momentum);
}

TEST_CASE("initial prototypes are normalized class means") {
  const MemoryBank bank = small_bank();
  const float h = static_cast<float>(1 / std::sqrt(2.0));
  CHECK(bank.source_prototypes[0] == doctest::Approx(h));
  CHECK(bank.source_prototypes[1] == doctest::Approx(h));
  CHECK(bank.source_prototypes[2] == doctest::Approx(h));
  CHECK(bank.target_instances[0] == doctest::Approx(1));
  CHECK(bank.target_instances[3] == doctest::Approx(1));
  CHECK(bank.entries() == 5);
  for (int l : bank.target_pseudo) CHECK(l == kOutlier);
  const MemoryBank again = small_bank();
  CHECK(again.stacked().values() == bank.stacked().values());
  CHECK_THROWS_AS(init_bank(Tensor<float>(Shape{2, 2}, 1.0f), {0, 0}, 2, Tensor<float>(Shape{1, 2}, 1.0f)), Error);
}

TEST_CASE("momentum update") {
  SUBCASE("mu 0 replaces") {
    MemoryBank bank = small_bank(0.0);
    const float f[2] = {0, 2};
    update(bank, 2, f);
    CHECK(bank.target_instances[0] == doctest::Approx(0));
    CHECK(bank.target_instances[1] == doctest::Approx(1));
  }
  SUBCASE("mu 1 keeps") {
    MemoryBank bank = small_bank(1.0);
    const float f[2] = {0, 2};
    update(bank, 2, f);
    CHECK(bank.target_instances[0] == doctest::Approx(1));
    CHECK(bank.target_instances[1] == doctest::Approx(0));
  }
  SUBCASE("mu 0.5 bisects") {
    MemoryBank bank = small_bank(0.5);
    const float f[2] = {0, 1};
    update(bank, 2, f);
    const float h = static_cast<float>(1 / std::sqrt(2.0));
    CHECK(bank.target_instances[0] == doctest::Approx(h));
    CHECK(bank.target_instances[1] == doctest::Approx(h));
  }
  SUBCASE("frozen source prototypes") {
    MemoryBank bank = small_bank(0.0);
    bank.freeze_source = true;
    const float f[2] = {0, 1};
    const auto before = bank.source_prototypes.clone();
    update(bank, 0, f);
    CHECK(bank.source_prototypes.values() == before.values());
  }
  SUBCASE("zero features and unknown entries") {
    MemoryBank bank = small_bank(0.0);
    const float zero[2] = {0, 0};
    const auto before = bank.stacked();
    update(bank, 3, zero);
    CHECK(bank.stacked().values() == before.values());
    const float f[2] = {1, 0};
    CHECK_THROWS_AS(update(bank, 5, f), Error);
    const float wide[3] = {1, 0, 0};
    CHECK_THROWS_AS(update(bank, 0, wide), Error);
  }
}

TEST_CASE("rows stay unit norm under random updates") {
  std::mt19937_64 rng(1);
  const auto src = random_tensor<float>({12, 8}, rng);
  std::vector<int> labels;
  for (int i = 0; i < 12; ++i) labels.push_back(i % 4);
  MemoryBank bank = init_bank(src, labels, 4, random_tensor<float>({20, 8}, rng), 0.3);
  for (int step = 0; step < 500; ++step) {
    const auto f = random_tensor<float>({8}, rng);
    bank.momentum = std::uniform_real_distribution<double>(0, 1)(rng);
    update(bank, random_size(rng, 0, bank.entries() - 1), f.values());
  }
  const auto all = bank.stacked();
  for (std::size_t i = 0; i < bank.entries(); ++i) {
    CHECK(std::abs(row_norm(all.data().subspan(i * 8, 8)) - 1) < 1e-6);
  }
}

TEST_CASE("label keys and lookup") {
  MemoryBank bank = small_bank();
  relabel(bank, {{0, kOutlier, 0}, 1, 1});
  const std::vector<int> keys = bank.labels();
  CHECK(keys == std::vector<int>{0, 1, 2, kOutlier, 2});
  CHECK(bank.target_key(0) == 2);
  CHECK(bank.target_key(kOutlier) == kOutlier);

  const BankPartition src = lookup(bank, 1);
  CHECK(src.positives == std::vector<std::size_t>{1});
  CHECK(src.positives.size() + src.negatives.size() == bank.entries());

  // Target sample 0 (entry 2) is never its own positive.
  const BankPartition self = lookup(bank, bank.target_key(0), static_cast<long>(bank.target_entry(0)));
  CHECK(self.positives == std::vector<std::size_t>{4});
  CHECK(self.positives.size() + self.negatives.size() == bank.entries() - 1);

  const BankPartition outlier = lookup(bank, kOutlier);
  CHECK(outlier.positives.empty());
  CHECK_THROWS_AS(relabel(bank, {{0, 1}, 1, 2}), Error);
}

TEST_CASE("checkpoint tensors round trip") {
  MemoryBank bank = small_bank();
  relabel(bank, {{1, kOutlier, 0}, 2, 2});
  const MemoryBank back = bank_from_tensors(bank_tensors(bank), 0.2, false);
  CHECK(back.stacked().values() == bank.stacked().values());
  CHECK(back.target_pseudo == bank.target_pseudo);
}

}  // namespace
}  // namespace dcdfa
