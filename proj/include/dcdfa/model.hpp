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

#ifndef DCDFA_MODEL_HPP_
#define DCDFA_MODEL_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "dcdfa/ops.hpp"
#include "dcdfa/optim.hpp"

namespace dcdfa {

struct ModelConfig {
  std::size_t in_channels = 3;
  std::array<std::size_t, 3> widths{16, 32, 64};  // last entry is C
  std::size_t reduction = 8;                      // r in the attention bottleneck
  double dropout = 0.1;                           // domain classifier
  double ema_momentum = 0.999;

  std::size_t channels() const { return widths.back(); }
};

/// Three conv3x3/stride-2/relu blocks.
template <typename T>
struct Encoder {
  std::array<Tensor<T>, 3> weight;
  std::array<Tensor<T>, 3> bias;
};

/// Channel attention: m = sigmoid(W1 relu(W0 avg) + W1 relu(W0 max)).
/// w0 is [C/r, C], w1 is [C, C/r].
template <typename T>
struct AttentionParams {
  Tensor<T> w0;
  Tensor<T> w1;
};

/// Two {linear, relu, dropout} blocks each shrinking width by 8, then a
/// linear layer to two logits. Index 0 of the softmax is "source".
template <typename T>
struct DomainClassifierParams {
  std::array<Tensor<T>, 3> weight;
  std::array<Tensor<T>, 3> bias;
};

template <typename T>
struct IdentityHead {
  Tensor<T> weight;  // [K, C]
  Tensor<T> bias;    // [K]
  std::size_t classes() const { return weight.defined() ? weight.dim(0) : 0; }
};

template <typename T>
struct ModelParams {
  Encoder<T> encoder;
  AttentionParams<T> attention;
  DomainClassifierParams<T> domain;
  IdentityHead<T> source_head;
  IdentityHead<T> target_head;

  /// Named views sharing storage with the fields. The target head, when
  /// present, is always last so its optimizer slot can be reset on resize.
  ParameterList<T> parameters() const;
  ModelParams clone() const;
};

/// Per-image decomposition, batched along the first dimension.
/// f = avgpool(F), b = m * f, e = (1 - m) * f.
template <typename T>
struct FeatureBundle {
  Tensor<T> feature_map;  // F: [B, C, H', W']
  Tensor<T> f;            // [B, C]
  Tensor<T> m;            // [B, C], in (0, 1)
  Tensor<T> b;            // domain-shared identity base
  Tensor<T> e;            // domain-specific enhancement

  FeatureBundle select(const std::vector<std::size_t>& rows) const;
};

/// r_tgt[k] = b_src[k] + e_tgt[k] (source identity, target domain) and
/// r_src[k] = b_tgt[k] + e_src[k] (target identity, source domain).
template <typename T>
struct Recomposition {
  Tensor<T> r_src;
  Tensor<T> r_tgt;
};

ModelParams<float> init_model(const ModelConfig& config, std::size_t source_classes,
                              std::size_t target_classes, std::uint64_t seed);

/// Fresh identity head; old weights are never carried over.
IdentityHead<float> init_identity_head(std::size_t classes, std::size_t channels,
                                       std::mt19937_64& rng);

template <typename To, typename From>
ModelParams<To> cast_model(const ModelParams<From>& p);

/// images [B, 3, H, W] -> F [B, C, H/8, W/8]. Throws on non-finite output.
template <typename T>
Tensor<T> encode(const Encoder<T>& encoder, const Tensor<T>& images);

template <typename T>
FeatureBundle<T> attend_decompose(const Tensor<T>& feature_map, const AttentionParams<T>& attention);

template <typename T>
Recomposition<T> recompose(const FeatureBundle<T>& src, const FeatureBundle<T>& tgt);

/// Returns p(source) for each row of feat [B, C]. Dropout is active only in
/// train mode and then draws from rng.
template <typename T>
Tensor<T> classify_domain(const Tensor<T>& feat, const DomainClassifierParams<T>& params,
                          double dropout, bool train_mode, std::mt19937_64* rng);

/// Raw logits [B, K].
template <typename T>
Tensor<T> classify_identity(const Tensor<T>& feat, const IdentityHead<T>& head);

struct MeanTeacherState {
  ModelParams<float> shadow;
  double momentum = 0.999;
};

MeanTeacherState make_teacher(const ModelParams<float>& student, double momentum);

/// shadow <- alpha * shadow + (1 - alpha) * student, parameter by parameter.
void ema_update(const ModelParams<float>& student, MeanTeacherState& teacher);

enum class FeatureKind { kFull, kBaseOnly };

/// Eval-mode features for a stack of images, [N, C], not normalized.
/// kFull returns f = avgpool(F) when skip_attention is set and b + e
/// otherwise; kBaseOnly returns b and always runs the attention module.
/// Pass the teacher's shadow parameters for mean-teacher features.
Tensor<float> infer_features(const ModelParams<float>& params, const Tensor<float>& images,
                             FeatureKind kind = FeatureKind::kFull, bool skip_attention = true,
                             std::size_t chunk = 128);

}  // namespace dcdfa

#endif  // DCDFA_MODEL_HPP_
