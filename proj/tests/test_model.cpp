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

#include <algorithm>
#include <cmath>
#include <random>

#include "dcdfa/model.hpp"
#include "dcdfa/synth_data.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dcdfa {
namespace {

using testing::random_tensor;

ModelParams<float> small_model(std::uint64_t seed = 3) { return init_model(ModelConfig{}, 5, 4, seed); }

void randomize_biases(ModelParams<float>& p, std::mt19937_64& rng) {
  for (auto& b : p.encoder.bias) b = random_tensor<float>(b.shape(), rng, -0.1, 0.1);
}

TEST_CASE("encoder shapes and linearity") {
  const auto p = small_model();
  const Tensor<float> zeros(Shape{2, 3, kImageHeight, kImageWidth});
  const Tensor<float> fmap = encode(p.encoder, zeros);
  CHECK(fmap.shape() == Shape{2, 64, 4, 2});
  CHECK(std::all_of(fmap.values().begin(), fmap.values().end(), [](float v) { return v == 0; }));

  std::mt19937_64 rng(1);
  const auto one = random_tensor<float>({1, 3, kImageHeight, kImageWidth}, rng, 0, 1);
  Tensor<float> twice(Shape{2, 3, kImageHeight, kImageWidth});
  std::copy(one.values().begin(), one.values().end(), twice.values().begin());
  std::copy(one.values().begin(), one.values().end(), twice.values().begin() + static_cast<long>(one.numel()));
  const Tensor<float> f2 = encode(p.encoder, twice);
  const std::size_t half = f2.numel() / 2;
  CHECK(std::equal(f2.values().begin(), f2.values().begin() + static_cast<long>(half),
                   f2.values().begin() + static_cast<long>(half)));
}

TEST_CASE("attention extremes") {
  std::mt19937_64 rng(2);
  const auto fmap = random_tensor<float>({3, 64, 4, 2}, rng, 0, 1);
  auto p = small_model();
  SUBCASE("zero logits give an even split") {
    std::fill(p.attention.w1.values().begin(), p.attention.w1.values().end(), 0.0f);
    const auto bundle = attend_decompose(fmap, p.attention);
    for (std::size_t i = 0; i < bundle.m.numel(); ++i) {
      CHECK(bundle.m[i] == 0.5f);
      CHECK(bundle.b[i] == doctest::Approx(bundle.f[i] / 2));
      CHECK(bundle.e[i] == doctest::Approx(bundle.f[i] / 2));
    }
  }
  SUBCASE("very negative logits send everything to e") {
    std::fill(p.attention.w0.values().begin(), p.attention.w0.values().end(), 1.0f);
    std::fill(p.attention.w1.values().begin(), p.attention.w1.values().end(), -100.0f);
    const auto bundle = attend_decompose(fmap, p.attention);
    for (std::size_t i = 0; i < bundle.m.numel(); ++i) {
      CHECK(bundle.m[i] < 1e-6f);
      CHECK(std::abs(bundle.b[i]) < 1e-6f);
      CHECK(bundle.e[i] == doctest::Approx(bundle.f[i]));
    }
  }
  CHECK_THROWS_AS(attend_decompose(random_tensor<float>({1, 32, 4, 2}, rng), p.attention), Error);
}

TEST_CASE("decomposition and recomposition identities on random bundles") {
  std::mt19937_64 rng(3);
  const auto p = small_model();
  for (int trial = 0; trial < 20; ++trial) {
    const auto fs = attend_decompose(random_tensor<float>({4, 64, 4, 2}, rng, 0, 2), p.attention);
    const auto ft = attend_decompose(random_tensor<float>({4, 64, 4, 2}, rng, 0, 2), p.attention);
    for (std::size_t i = 0; i < fs.f.numel(); ++i) CHECK(std::abs(fs.b[i] + fs.e[i] - fs.f[i]) < 1e-6f);
    const auto r = recompose(fs, ft);
    for (std::size_t i = 0; i < fs.f.numel(); ++i) {
      CHECK(std::abs(r.r_tgt[i] + r.r_src[i] - fs.f[i] - ft.f[i]) < 1e-6f);
    }
    // Exchanging the bases again restores the originals.
    FeatureBundle<float> as_src = fs, as_tgt = ft;
    as_src.b = ft.b;
    as_src.e = fs.e;
    as_tgt.b = fs.b;
    as_tgt.e = ft.e;
    const auto back = recompose(as_src, as_tgt);
    for (std::size_t i = 0; i < fs.f.numel(); ++i) {
      CHECK(std::abs(back.r_src[i] - fs.f[i]) < 1e-6f);
      CHECK(std::abs(back.r_tgt[i] - ft.f[i]) < 1e-6f);
    }
  }
}

TEST_CASE("recompose with zero target enhancement returns the source base") {
  std::mt19937_64 rng(4);
  const auto p = small_model();
  const auto fs = attend_decompose(random_tensor<float>({2, 64, 4, 2}, rng, 0, 1), p.attention);
  auto ft = attend_decompose(random_tensor<float>({2, 64, 4, 2}, rng, 0, 1), p.attention);
  ft.e = Tensor<float>(ft.e.shape());
  const auto r = recompose(fs, ft);
  CHECK(r.r_tgt.values() == fs.b.values());
}

TEST_CASE("domain classifier") {
  std::mt19937_64 rng(5);
  auto p = small_model();
  const auto feat = random_tensor<float>({6, 64}, rng, 0, 1);
  SUBCASE("zero final layer is undecided") {
    std::fill(p.domain.weight[2].values().begin(), p.domain.weight[2].values().end(), 0.0f);
    const auto prob = classify_domain(feat, p.domain, 0.1, false, nullptr);
    for (float v : prob.values()) CHECK(v == 0.5f);
  }
  SUBCASE("eval mode is deterministic") {
    CHECK(classify_domain(feat, p.domain, 0.5, false, nullptr).values() ==
          classify_domain(feat, p.domain, 0.5, false, nullptr).values());
  }
  SUBCASE("train mode replays with the same rng") {
    std::mt19937_64 a(9), b(9);
    CHECK(classify_domain(feat, p.domain, 0.5, true, &a).values() ==
          classify_domain(feat, p.domain, 0.5, true, &b).values());
    CHECK_THROWS_AS(classify_domain(feat, p.domain, 0.5, true, nullptr), Error);
  }
}

TEST_CASE("identity head") {
  std::mt19937_64 rng(6);
  const auto feat = random_tensor<float>({3, 8}, rng);
  IdentityHead<float> head{Tensor<float>(Shape{4, 8}), Tensor<float>(Shape{4})};
  const auto uniform = classify_identity(feat, head);
  for (float v : uniform.values()) CHECK(v == 0);
  for (std::size_t k = 0; k < 4; ++k) head.weight[k * 8 + k] = 1;
  const auto logits = classify_identity(feat, head);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(logits[i * 4 + k] == feat[i * 8 + k]);
  }
  std::mt19937_64 r1(1), r2(2);
  CHECK(init_identity_head(4, 8, r1).weight.values() != init_identity_head(4, 8, r2).weight.values());
  CHECK_THROWS_AS(classify_identity(random_tensor<float>({3, 7}, rng), head), Error);
}

TEST_CASE("parameter list puts the target head last") {
  const auto p = small_model();
  const auto params = p.parameters();
  REQUIRE(params.size() >= 2);
  CHECK(params[params.size() - 2].name == "target_head.weight");
  CHECK(params.back().name == "target_head.bias");
}

TEST_CASE("ema update") {
  auto student = small_model(1);
  SUBCASE("alpha 1 keeps the teacher") {
    auto teacher = make_teacher(small_model(2), 1.0);
    const auto before = teacher.shadow.clone();
    ema_update(student, teacher);
    CHECK(teacher.shadow.encoder.weight[0].values() == before.encoder.weight[0].values());
  }
  SUBCASE("alpha 0 copies the student") {
    auto teacher = make_teacher(small_model(2), 0.0);
    ema_update(student, teacher);
    const auto s = student.parameters(), t = teacher.shadow.parameters();
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].value.values() == t[i].value.values());
  }
  SUBCASE("scalar arithmetic") {
    for (auto& w : student.parameters()) std::fill(w.value.values().begin(), w.value.values().end(), 1.0f);
    auto teacher = make_teacher(small_model(2), 0.999);
    for (auto& w : teacher.shadow.parameters()) std::fill(w.value.values().begin(), w.value.values().end(), 0.0f);
    ema_update(student, teacher);
    CHECK(teacher.shadow.attention.w0[0] == doctest::Approx(0.001));
  }
  SUBCASE("teacher stays between previous teacher and student") {
    auto teacher = make_teacher(small_model(2), 0.7);
    const auto prev = teacher.shadow.clone();
    ema_update(student, teacher);
    const auto s = student.parameters(), t = teacher.shadow.parameters(), o = prev.parameters();
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s[i].value.numel(); ++j) {
        const float lo = std::min(s[i].value[j], o[i].value[j]), hi = std::max(s[i].value[j], o[i].value[j]);
        CHECK(t[i].value[j] >= lo);
        CHECK(t[i].value[j] <= hi);
      }
    }
  }
  SUBCASE("shape drift is an error") {
    auto teacher = make_teacher(init_model(ModelConfig{}, 5, 3, 2), 0.9);
    CHECK_THROWS_AS(ema_update(student, teacher), Error);
  }
}

TEST_CASE("inference features") {
  std::mt19937_64 rng(7);
  auto p = small_model();
  randomize_biases(p, rng);
  const auto images = random_tensor<float>({10, 3, kImageHeight, kImageWidth}, rng, 0, 1);
  const auto skip = infer_features(p, images, FeatureKind::kFull, true, 4);
  const auto full = infer_features(p, images, FeatureKind::kFull, false, 3);
  for (std::size_t i = 0; i < skip.numel(); ++i) CHECK(std::abs(skip[i] - full[i]) < 1e-6f);
  const auto base = infer_features(p, images, FeatureKind::kBaseOnly);
  for (std::size_t i = 0; i < skip.numel(); ++i) CHECK(base[i] <= skip[i] + 1e-6f);

  auto teacher = make_teacher(small_model(9), 0.0);
  ema_update(p, teacher);
  CHECK(infer_features(teacher.shadow, images).values() == skip.values());
}

}  // namespace
}  // namespace dcdfa
