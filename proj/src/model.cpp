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

#include "dcdfa/model.hpp"

#include <algorithm>
#include <cmath>

namespace dcdfa {
namespace {

Tensor<float> normal_tensor(Shape shape, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  Tensor<float> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(n(rng));
  return t;
}

template <typename To, typename From>
Tensor<To> cast_or_empty(const Tensor<From>& t) {
  if (!t.defined()) return {};
  return tensor_cast<To>(t);
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  Tensor<T> y = matmul(x, transpose(weight));
  return bias.defined() ? y + bias : y;
}

template <typename T>
Tensor<T> clone_or_empty(const Tensor<T>& t) {
  return t.defined() ? t.clone() : Tensor<T>{};
}

}  // namespace

template <typename T>
ParameterList<T> ModelParams<T>::parameters() const {
  ParameterList<T> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back({"encoder.conv" + std::to_string(i + 1) + ".weight", encoder.weight[i]});
    out.push_back({"encoder.conv" + std::to_string(i + 1) + ".bias", encoder.bias[i]});
  }
  out.push_back({"attention.w0", attention.w0});
  out.push_back({"attention.w1", attention.w1});
  for (std::size_t i = 0; i < 3; ++i) {
    out.push_back({"domain.fc" + std::to_string(i + 1) + ".weight", domain.weight[i]});
    out.push_back({"domain.fc" + std::to_string(i + 1) + ".bias", domain.bias[i]});
  }
  out.push_back({"source_head.weight", source_head.weight});
  out.push_back({"source_head.bias", source_head.bias});
  if (target_head.weight.defined()) {
    out.push_back({"target_head.weight", target_head.weight});
    out.push_back({"target_head.bias", target_head.bias});
  }
  return out;
}

template <typename T>
ModelParams<T> ModelParams<T>::clone() const {
  ModelParams<T> c;
  for (std::size_t i = 0; i < 3; ++i) {
    c.encoder.weight[i] = encoder.weight[i].clone();
    c.encoder.bias[i] = encoder.bias[i].clone();
    c.domain.weight[i] = domain.weight[i].clone();
    c.domain.bias[i] = domain.bias[i].clone();
  }
  c.attention.w0 = attention.w0.clone();
  c.attention.w1 = attention.w1.clone();
  c.source_head = {clone_or_empty(source_head.weight), clone_or_empty(source_head.bias)};
  c.target_head = {clone_or_empty(target_head.weight), clone_or_empty(target_head.bias)};
  return c;
}

template <typename T>
FeatureBundle<T> FeatureBundle<T>::select(const std::vector<std::size_t>& rows) const {
  FeatureBundle<T> out;
  if (feature_map.defined()) out.feature_map = index_rows(feature_map, rows);
  out.f = index_rows(f, rows);
  out.m = index_rows(m, rows);
  out.b = index_rows(b, rows);
  out.e = index_rows(e, rows);
  return out;
}

IdentityHead<float> init_identity_head(std::size_t classes, std::size_t channels,
                                       std::mt19937_64& rng) {
  IdentityHead<float> h;
  if (classes == 0) return h;
  h.weight = normal_tensor(Shape{classes, channels}, 0.01, rng);
  h.bias = Tensor<float>(Shape{classes});
  return h;
}

ModelParams<float> init_model(const ModelConfig& config, std::size_t source_classes,
                              std::size_t target_classes, std::uint64_t seed) {
  const std::size_t c = config.channels();
  if (config.reduction == 0 || c % config.reduction != 0) {
    throw Error("init_model: reduction ratio " + std::to_string(config.reduction) +
                " does not divide " + std::to_string(c) + " channels");
  }
  std::mt19937_64 rng(seed);
  ModelParams<float> p;
  std::size_t in = config.in_channels;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t out = config.widths[i];
    p.encoder.weight[i] = normal_tensor(Shape{out, in, 3, 3}, std::sqrt(2.0 / (in * 9.0)), rng);
    p.encoder.bias[i] = Tensor<float>(Shape{out});
    in = out;
  }
  const std::size_t hidden = c / config.reduction;
  p.attention.w0 = normal_tensor(Shape{hidden, c}, std::sqrt(2.0 / c), rng);
  p.attention.w1 = normal_tensor(Shape{c, hidden}, std::sqrt(1.0 / hidden), rng);

  const std::size_t d1 = std::max<std::size_t>(1, c / 8);
  const std::size_t d2 = std::max<std::size_t>(1, d1 / 8);
  const std::array<std::size_t, 4> dims{c, d1, d2, 2};
  for (std::size_t i = 0; i < 3; ++i) {
    p.domain.weight[i] =
        normal_tensor(Shape{dims[i + 1], dims[i]}, std::sqrt(2.0 / dims[i]), rng);
    p.domain.bias[i] = Tensor<float>(Shape{dims[i + 1]});
  }
  p.source_head = init_identity_head(source_classes, c, rng);
  p.target_head = init_identity_head(target_classes, c, rng);
  return p;
}

template <typename To, typename From>
ModelParams<To> cast_model(const ModelParams<From>& p) {
  ModelParams<To> c;
  for (std::size_t i = 0; i < 3; ++i) {
    c.encoder.weight[i] = cast_or_empty<To>(p.encoder.weight[i]);
    c.encoder.bias[i] = cast_or_empty<To>(p.encoder.bias[i]);
    c.domain.weight[i] = cast_or_empty<To>(p.domain.weight[i]);
    c.domain.bias[i] = cast_or_empty<To>(p.domain.bias[i]);
  }
  c.attention.w0 = cast_or_empty<To>(p.attention.w0);
  c.attention.w1 = cast_or_empty<To>(p.attention.w1);
  c.source_head = {cast_or_empty<To>(p.source_head.weight), cast_or_empty<To>(p.source_head.bias)};
  c.target_head = {cast_or_empty<To>(p.target_head.weight), cast_or_empty<To>(p.target_head.bias)};
  return c;
}

template <typename T>
Tensor<T> encode(const Encoder<T>& encoder, const Tensor<T>& images) {
  if (images.ndim() != 4) throw Error("encode: expected [B, 3, H, W], got " + shape_string(images.shape()));
  Tensor<T> x = images;
  for (std::size_t i = 0; i < 3; ++i) {
    x = relu(conv2d(x, encoder.weight[i], encoder.bias[i], 2, 1));
  }
  for (T v : x.data()) {
    if (!std::isfinite(static_cast<double>(v))) throw Error("encode: non-finite activation");
  }
  return x;
}

template <typename T>
FeatureBundle<T> attend_decompose(const Tensor<T>& feature_map, const AttentionParams<T>& attention) {
  if (feature_map.ndim() != 4) {
    throw Error("attend_decompose: expected [B, C, H, W], got " + shape_string(feature_map.shape()));
  }
  const std::size_t c = feature_map.dim(1);
  if (attention.w0.dim(1) != c || attention.w1.dim(0) != c ||
      attention.w1.dim(1) != attention.w0.dim(0)) {
    throw Error("attend_decompose: attention weights " + shape_string(attention.w0.shape()) + " / " +
                shape_string(attention.w1.shape()) + " do not fit " + std::to_string(c) + " channels");
  }
  FeatureBundle<T> out;
  out.feature_map = feature_map;
  out.f = pool(PoolKind::kSpatialAvg, feature_map);
  const Tensor<T> fmax = pool(PoolKind::kSpatialMax, feature_map);
  const Tensor<T> w0t = transpose(attention.w0);
  const Tensor<T> w1t = transpose(attention.w1);
  const Tensor<T> logits = matmul(relu(matmul(out.f, w0t)), w1t) + matmul(relu(matmul(fmax, w0t)), w1t);
  out.m = sigmoid(logits);
  out.b = out.m * out.f;
  out.e = rsub(T(1), out.m) * out.f;
  return out;
}

template <typename T>
Recomposition<T> recompose(const FeatureBundle<T>& src, const FeatureBundle<T>& tgt) {
  if (src.b.shape() != tgt.b.shape()) {
    throw Error("recompose: bundles differ in shape: " + shape_string(src.b.shape()) + " vs " +
                shape_string(tgt.b.shape()));
  }
  return {tgt.b + src.e, src.b + tgt.e};
}

template <typename T>
Tensor<T> classify_domain(const Tensor<T>& feat, const DomainClassifierParams<T>& params,
                          double dropout, bool train_mode, std::mt19937_64* rng) {
  Tensor<T> h = feat;
  for (std::size_t i = 0; i < 2; ++i) {
    h = relu(linear(h, params.weight[i], params.bias[i]));
    if (train_mode && dropout > 0.0) {
      if (rng == nullptr) throw Error("classify_domain: train mode needs an rng for dropout");
      std::bernoulli_distribution keep(1.0 - dropout);
      Tensor<T> mask(h.shape());
      const T scale = static_cast<T>(1.0 / (1.0 - dropout));
      for (auto& v : mask.data()) v = keep(*rng) ? scale : T(0);
      h = h * mask;
    }
  }
  const Tensor<T> logits = linear(h, params.weight[2], params.bias[2]);
  const std::size_t n = logits.dim(0);
  std::vector<std::size_t> col0(n), col1(n);
  for (std::size_t i = 0; i < n; ++i) {
    col0[i] = 2 * i;
    col1[i] = 2 * i + 1;
  }
  // Two-way softmax, first component.
  return sigmoid(gather(logits, col0) - gather(logits, col1));
}

template <typename T>
Tensor<T> classify_identity(const Tensor<T>& feat, const IdentityHead<T>& head) {
  if (!head.weight.defined()) throw Error("classify_identity: head has no classes");
  if (feat.ndim() != 2 || feat.dim(1) != head.weight.dim(1)) {
    throw Error("classify_identity: features " + shape_string(feat.shape()) +
                " do not match head " + shape_string(head.weight.shape()));
  }
  return linear(feat, head.weight, head.bias);
}

MeanTeacherState make_teacher(const ModelParams<float>& student, double momentum) {
  return {student.clone(), momentum};
}

void ema_update(const ModelParams<float>& student, MeanTeacherState& teacher) {
  const auto src = student.parameters();
  auto dst = teacher.shadow.parameters();
  if (src.size() != dst.size()) {
    throw Error("ema_update: student has " + std::to_string(src.size()) + " tensors, teacher " +
                std::to_string(dst.size()));
  }
  const double a = teacher.momentum;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].value.shape() != dst[i].value.shape()) {
      throw Error("ema_update: shape drift at '" + src[i].name + "': " +
                  shape_string(src[i].value.shape()) + " vs " + shape_string(dst[i].value.shape()));
    }
    auto s = src[i].value.data();
    auto t = dst[i].value.data();
    for (std::size_t j = 0; j < s.size(); ++j) {
      t[j] = static_cast<float>(a * t[j] + (1.0 - a) * s[j]);
    }
  }
}

Tensor<float> infer_features(const ModelParams<float>& params, const Tensor<float>& images,
                             FeatureKind kind, bool skip_attention, std::size_t chunk) {
  NoGradGuard guard;
  const std::size_t n = images.dim(0);
  const std::size_t c = params.encoder.weight[2].dim(0);
  Tensor<float> out(Shape{n, c});
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t len = std::min(chunk, n - start);
    std::vector<std::size_t> rows(len);
    for (std::size_t i = 0; i < len; ++i) rows[i] = start + i;
    const Tensor<float> fmap = encode(params.encoder, index_rows(images, rows));
    Tensor<float> feats;
    if (kind == FeatureKind::kFull && skip_attention) {
      feats = pool(PoolKind::kSpatialAvg, fmap);
    } else {
      const auto bundle = attend_decompose(fmap, params.attention);
      feats = kind == FeatureKind::kBaseOnly ? bundle.b : bundle.b + bundle.e;
    }
    std::copy(feats.data().begin(), feats.data().end(), out.data().begin() + static_cast<long>(start * c));
  }
  return out;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template struct FeatureBundle<float>;
template struct FeatureBundle<double>;
template ModelParams<double> cast_model<double, float>(const ModelParams<float>&);
template ModelParams<float> cast_model<float, double>(const ModelParams<double>&);

#define DCDFA_INSTANTIATE_MODEL(T)                                                            \
  template Tensor<T> encode(const Encoder<T>&, const Tensor<T>&);                            \
  template FeatureBundle<T> attend_decompose(const Tensor<T>&, const AttentionParams<T>&);   \
  template Recomposition<T> recompose(const FeatureBundle<T>&, const FeatureBundle<T>&);     \
  template Tensor<T> classify_domain(const Tensor<T>&, const DomainClassifierParams<T>&,     \
                                     double, bool, std::mt19937_64*);                        \
  template Tensor<T> classify_identity(const Tensor<T>&, const IdentityHead<T>&);

DCDFA_INSTANTIATE_MODEL(float)
DCDFA_INSTANTIATE_MODEL(double)

#undef DCDFA_INSTANTIATE_MODEL

}  // namespace dcdfa
