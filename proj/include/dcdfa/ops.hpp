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

#ifndef DCDFA_OPS_HPP_
#define DCDFA_OPS_HPP_

#include <vector>

#include "dcdfa/tensor.hpp"

// Differentiable operations. Every op records a backward rule on the active
// tape when recording is on and at least one input requires a gradient.
//
// Broadcasting is deliberately narrow: operands either share a shape, one is
// a single element, or one operand's shape equals the trailing dimensions of
// the other (a per-feature vector applied across an explicit batch dim).

namespace dcdfa {

enum class BinaryOp { kAdd, kSub, kMul, kDiv };
enum class UnaryOp { kNeg, kSigmoid, kRelu, kExp, kLog, kSqrt, kSquare };
enum class PoolKind { kSpatialAvg, kSpatialMax, kGlobalAvg };

template <typename T>
Tensor<T> elementwise(BinaryOp op, const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> elementwise(BinaryOp op, const Tensor<T>& a, T b);
template <typename T>
Tensor<T> elementwise(UnaryOp op, const Tensor<T>& a);

template <typename T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(BinaryOp::kAdd, a, b); }
template <typename T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(BinaryOp::kSub, a, b); }
template <typename T>
Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(BinaryOp::kMul, a, b); }
template <typename T>
Tensor<T> operator/(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(BinaryOp::kDiv, a, b); }
template <typename T>
Tensor<T> operator+(const Tensor<T>& a, T b) { return elementwise(BinaryOp::kAdd, a, b); }
template <typename T>
Tensor<T> operator-(const Tensor<T>& a, T b) { return elementwise(BinaryOp::kSub, a, b); }
template <typename T>
Tensor<T> operator*(const Tensor<T>& a, T b) { return elementwise(BinaryOp::kMul, a, b); }
template <typename T>
Tensor<T> operator/(const Tensor<T>& a, T b) { return elementwise(BinaryOp::kDiv, a, b); }
template <typename T>
Tensor<T> operator-(const Tensor<T>& a) { return elementwise(UnaryOp::kNeg, a); }
/// s - a, for expressions like (1 - m).
template <typename T>
Tensor<T> rsub(T s, const Tensor<T>& a) { return elementwise(BinaryOp::kAdd, -a, s); }

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) { return elementwise(UnaryOp::kSigmoid, a); }
template <typename T>
Tensor<T> relu(const Tensor<T>& a) { return elementwise(UnaryOp::kRelu, a); }
template <typename T>
Tensor<T> exp(const Tensor<T>& a) { return elementwise(UnaryOp::kExp, a); }
/// Throws on non-positive input; callers that need a guard clamp first.
template <typename T>
Tensor<T> log(const Tensor<T>& a) { return elementwise(UnaryOp::kLog, a); }
template <typename T>
Tensor<T> sqrt(const Tensor<T>& a) { return elementwise(UnaryOp::kSqrt, a); }
template <typename T>
Tensor<T> square(const Tensor<T>& a) { return elementwise(UnaryOp::kSquare, a); }

/// Gradient passes only where lo < x < hi.
template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi);

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> transpose(const Tensor<T>& a);

/// x: [B, C, H, W], kernels: [C', C, kh, kw], bias: [C'] or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding);

/// [B, C, H, W] -> [B, C]. Max-pool routes the gradient to the first
/// row-major maximum.
template <typename T>
Tensor<T> pool(PoolKind kind, const Tensor<T>& x);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);
/// [N, K] -> [N].
template <typename T>
Tensor<T> sum_rows(const Tensor<T>& a);
/// Numerically stable log(sum(exp(row))) for each row of [N, K] -> [N].
template <typename T>
Tensor<T> logsumexp_rows(const Tensor<T>& a);
/// Divides each row of [N, C] by max(norm, kNormFloor), so zero rows stay zero.
inline constexpr double kNormFloor = 1e-12;

template <typename T>
Tensor<T> l2_normalize_rows(const Tensor<T>& a);

/// Picks elements by flat index -> [n].
template <typename T>
Tensor<T> gather(const Tensor<T>& a, const std::vector<std::size_t>& flat_index);
/// Picks rows (first dimension) by index.
template <typename T>
Tensor<T> index_rows(const Tensor<T>& a, const std::vector<std::size_t>& rows);
/// Concatenates [N] or [N, k] pieces along columns -> [N, sum k].
template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape);

}  // namespace dcdfa

#endif  // DCDFA_OPS_HPP_
