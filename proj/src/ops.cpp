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

#include "dcdfa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dcdfa/kernels.hpp"

namespace dcdfa {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<TensorNode<T>>;

template <typename T>
bool wants_tape(std::initializer_list<const Tensor<T>*> inputs) {
  if (!active_tape<T>().recording()) return false;
  for (const auto* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
void record(const Tensor<T>& out, std::vector<NodePtr<T>> inputs, std::function<void()> rule) {
  active_tape<T>().record(std::move(inputs), out.node(), std::move(rule));
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t na = shape_numel(a), nb = shape_numel(b);
  if (a == b) return a;
  if (nb == 1 && na >= 1) return a;
  if (na == 1) return b;
  if (is_suffix(b, a)) return a;
  if (is_suffix(a, b)) return b;
  throw Error("elementwise: shapes " + shape_string(a) + " and " + shape_string(b) +
              " are not broadcast-compatible");
}

template <typename T>
void add_into(std::vector<T>& grad, const std::vector<double>& acc) {
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += static_cast<T>(acc[i]);
}

void require_ndim(const char* op, const Shape& s, std::size_t n) {
  if (s.size() != n) {
    throw Error(std::string(op) + ": expected " + std::to_string(n) + "-d tensor, got " +
                shape_string(s));
  }
}

}  // namespace

template <typename T>
Tensor<T> elementwise(BinaryOp op, const Tensor<T>& a, const Tensor<T>& b) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const std::size_t n = shape_numel(out_shape), na = a.numel(), nb = b.numel();
  Tensor<T> out(out_shape);
  const T* x = a.data().data();
  const T* y = b.data().data();
  T* z = out.data().data();
  switch (op) {
    case BinaryOp::kAdd:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i % na] + y[i % nb];
      break;
    case BinaryOp::kSub:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i % na] - y[i % nb];
      break;
    case BinaryOp::kMul:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i % na] * y[i % nb];
      break;
    case BinaryOp::kDiv:
      for (std::size_t i = 0; i < nb; ++i) {
        if (y[i] == T(0)) throw Error("elementwise div: division by zero");
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i % na] / y[i % nb];
      break;
  }
  if (wants_tape({&a, &b})) {
    auto an = a.node(), bn = b.node(), on = out.node();
    record(out, {an, bn}, [an, bn, on, op, n, na, nb]() {
      const auto& g = on->grad;
      std::vector<double> ga(an->requires_grad ? na : 0), gb(bn->requires_grad ? nb : 0);
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        const double xa = an->data[i % na], yb = bn->data[i % nb];
        double da = 0, db = 0;
        switch (op) {
          case BinaryOp::kAdd: da = 1; db = 1; break;
          case BinaryOp::kSub: da = 1; db = -1; break;
          case BinaryOp::kMul: da = yb; db = xa; break;
          case BinaryOp::kDiv: da = 1.0 / yb; db = -xa / (yb * yb); break;
        }
        if (!ga.empty()) ga[i % na] += gi * da;
        if (!gb.empty()) gb[i % nb] += gi * db;
      }
      if (!ga.empty()) add_into(an->grad, ga);
      if (!gb.empty()) add_into(bn->grad, gb);
    });
  }
  return out;
}

template <typename T>
Tensor<T> elementwise(BinaryOp op, const Tensor<T>& a, T s) {
  if (op == BinaryOp::kDiv && s == T(0)) throw Error("elementwise div: division by zero");
  Tensor<T> out(a.shape());
  const std::size_t n = a.numel();
  const T* x = a.data().data();
  T* z = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    switch (op) {
      case BinaryOp::kAdd: z[i] = x[i] + s; break;
      case BinaryOp::kSub: z[i] = x[i] - s; break;
      case BinaryOp::kMul: z[i] = x[i] * s; break;
      case BinaryOp::kDiv: z[i] = x[i] / s; break;
    }
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    const T d = (op == BinaryOp::kMul) ? s : (op == BinaryOp::kDiv ? T(1) / s : T(1));
    record(out, {an}, [an, on, d]() {
      for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * d;
    });
  }
  return out;
}

template <typename T>
Tensor<T> elementwise(UnaryOp op, const Tensor<T>& a) {
  Tensor<T> out(a.shape());
  const std::size_t n = a.numel();
  const T* x = a.data().data();
  T* z = out.data().data();
  switch (op) {
    case UnaryOp::kNeg:
      for (std::size_t i = 0; i < n; ++i) z[i] = -x[i];
      break;
    case UnaryOp::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        // Split by sign so exp never overflows.
        if (x[i] >= T(0)) {
          z[i] = T(1) / (T(1) + std::exp(-x[i]));
        } else {
          const T e = std::exp(x[i]);
          z[i] = e / (T(1) + e);
        }
      }
      break;
    case UnaryOp::kRelu:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i] > T(0) ? x[i] : T(0);
      break;
    case UnaryOp::kExp:
      for (std::size_t i = 0; i < n; ++i) z[i] = std::exp(x[i]);
      break;
    case UnaryOp::kLog:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > T(0))) {
          throw Error("log: non-positive input " + std::to_string(static_cast<double>(x[i])));
        }
        z[i] = std::log(x[i]);
      }
      break;
    case UnaryOp::kSqrt:
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] < T(0)) throw Error("sqrt: negative input");
        z[i] = std::sqrt(x[i]);
      }
      break;
    case UnaryOp::kSquare:
      for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * x[i];
      break;
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, op]() {
      const auto& g = on->grad;
      const auto& x = an->data;
      const auto& y = on->data;
      auto& ga = an->grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        switch (op) {
          case UnaryOp::kNeg: ga[i] -= g[i]; break;
          case UnaryOp::kSigmoid: ga[i] += g[i] * y[i] * (T(1) - y[i]); break;
          case UnaryOp::kRelu: ga[i] += x[i] > T(0) ? g[i] : T(0); break;
          case UnaryOp::kExp: ga[i] += g[i] * y[i]; break;
          case UnaryOp::kLog: ga[i] += g[i] / x[i]; break;
          case UnaryOp::kSqrt:
            if (y[i] > T(0)) ga[i] += g[i] / (T(2) * y[i]);
            break;
          case UnaryOp::kSquare: ga[i] += T(2) * x[i] * g[i]; break;
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = std::min(std::max(a[i], lo), hi);
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, lo, hi]() {
      for (std::size_t i = 0; i < on->grad.size(); ++i) {
        const T x = an->data[i];
        if (x > lo && x < hi) an->grad[i] += on->grad[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_ndim("matmul", a.shape(), 2);
  require_ndim("matmul", b.shape(), 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw Error("matmul: inner dimensions differ: " + shape_string(a.shape()) + " x " +
                shape_string(b.shape()));
  }
  Tensor<T> out(Shape{m, n});
  kernels::gemm(m, k, n, a.data().data(), b.data().data(), out.data().data(), false);
  if (wants_tape({&a, &b})) {
    auto an = a.node(), bn = b.node(), on = out.node();
    record(out, {an, bn}, [an, bn, on, m, k, n]() {
      if (an->requires_grad) {
        // dA = dC * B^T
        std::vector<T> bt(n * k);
        kernels::transpose(k, n, bn->data.data(), bt.data());
        kernels::gemm(m, n, k, on->grad.data(), bt.data(), an->grad.data(), true);
      }
      if (bn->requires_grad) {
        // dB = A^T * dC
        std::vector<T> at(k * m);
        kernels::transpose(m, k, an->data.data(), at.data());
        kernels::gemm(k, m, n, at.data(), on->grad.data(), bn->grad.data(), true);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  require_ndim("transpose", a.shape(), 2);
  const std::size_t r = a.dim(0), c = a.dim(1);
  Tensor<T> out(Shape{c, r});
  kernels::transpose(r, c, a.data().data(), out.data().data());
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, r, c]() {
      std::vector<T> g(r * c);
      kernels::transpose(c, r, on->grad.data(), g.data());
      for (std::size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding) {
  require_ndim("conv2d", x.shape(), 4);
  require_ndim("conv2d", kernels.shape(), 4);
  if (stride == 0) throw Error("conv2d: stride must be positive");
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  if (kernels.dim(1) != cin) {
    throw Error("conv2d: input " + shape_string(x.shape()) + " does not match kernels " +
                shape_string(kernels.shape()));
  }
  if (kh > h + 2 * padding || kw > w + 2 * padding) {
    throw Error("conv2d: kernel " + shape_string(kernels.shape()) +
                " larger than padded input " + shape_string(x.shape()));
  }
  if (bias.defined() && (bias.ndim() != 1 || bias.dim(0) != cout)) {
    throw Error("conv2d: bias " + shape_string(bias.shape()) + " does not match " +
                std::to_string(cout) + " output channels");
  }
  kernels::ConvGeometry g{batch, cin, h, w, kh, kw, stride, padding};
  const std::size_t ho = g.out_h(), wo = g.out_w(), plane = ho * wo;
  const std::size_t ckk = cin * kh * kw, cols_n = batch * plane;

  auto cols = std::make_shared<std::vector<T>>(ckk * cols_n);
  kernels::im2col(g, x.data().data(), cols->data());
  std::vector<T> tmp(cout * cols_n);
  kernels::gemm(cout, ckk, cols_n, kernels.data().data(), cols->data(), tmp.data(), false);

  Tensor<T> out(Shape{batch, cout, ho, wo});
  T* o = out.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < cout; ++c) {
      const T add = bias.defined() ? bias[c] : T(0);
      const T* src = tmp.data() + c * cols_n + b * plane;
      T* dst = o + (b * cout + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] + add;
    }
  }

  if (wants_tape({&x, &kernels, &bias})) {
    auto xn = x.node(), kn = kernels.node(), on = out.node();
    auto bn = bias.defined() ? bias.node() : nullptr;
    std::vector<NodePtr<T>> inputs{xn, kn};
    if (bn) inputs.push_back(bn);
    record(out, inputs, [xn, kn, bn, on, cols, g, cout, ckk, cols_n, plane]() {
      const std::size_t batch = g.batch;
      std::vector<T> dtmp(cout * cols_n);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < cout; ++c) {
          const T* src = on->grad.data() + (b * cout + c) * plane;
          std::copy(src, src + plane, dtmp.data() + c * cols_n + b * plane);
        }
      }
      if (bn && bn->requires_grad) {
        for (std::size_t c = 0; c < cout; ++c) {
          double acc = 0;
          const T* row = dtmp.data() + c * cols_n;
          for (std::size_t p = 0; p < cols_n; ++p) acc += row[p];
          bn->grad[c] += static_cast<T>(acc);
        }
      }
      if (kn->requires_grad) {
        std::vector<T> cols_t(cols_n * ckk);
        kernels::transpose(ckk, cols_n, cols->data(), cols_t.data());
        kernels::gemm(cout, cols_n, ckk, dtmp.data(), cols_t.data(), kn->grad.data(), true);
      }
      if (xn->requires_grad) {
        std::vector<T> k_t(ckk * cout);
        kernels::transpose(cout, ckk, kn->data.data(), k_t.data());
        std::vector<T> dcols(ckk * cols_n);
        kernels::gemm(ckk, cout, cols_n, k_t.data(), dtmp.data(), dcols.data(), false);
        kernels::col2im_add(g, dcols.data(), xn->grad.data());
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> pool(PoolKind kind, const Tensor<T>& x) {
  require_ndim("pool", x.shape(), 4);
  const std::size_t batch = x.dim(0), ch = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (plane == 0) throw Error("pool: empty spatial extent " + shape_string(x.shape()));
  Tensor<T> out(Shape{batch, ch});
  const bool is_max = kind == PoolKind::kSpatialMax;
  auto argmax = std::make_shared<std::vector<std::size_t>>(is_max ? batch * ch : 0);
  for (std::size_t bc = 0; bc < batch * ch; ++bc) {
    const T* src = x.data().data() + bc * plane;
    if (is_max) {
      std::size_t best = 0;
      for (std::size_t p = 1; p < plane; ++p) {
        if (src[p] > src[best]) best = p;
      }
      (*argmax)[bc] = best;
      out[bc] = src[best];
    } else {
      double acc = 0;
      for (std::size_t p = 0; p < plane; ++p) acc += src[p];
      out[bc] = static_cast<T>(acc / static_cast<double>(plane));
    }
  }
  if (wants_tape({&x})) {
    auto xn = x.node(), on = out.node();
    record(out, {xn}, [xn, on, argmax, is_max, plane]() {
      const std::size_t n = on->grad.size();
      for (std::size_t bc = 0; bc < n; ++bc) {
        T* dst = xn->grad.data() + bc * plane;
        if (is_max) {
          dst[(*argmax)[bc]] += on->grad[bc];
        } else {
          const T g = on->grad[bc] / static_cast<T>(plane);
          for (std::size_t p = 0; p < plane; ++p) dst[p] += g;
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  double acc = 0;
  for (T v : a.data()) acc += v;
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc));
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on]() {
      const T g = on->grad[0];
      for (auto& v : an->grad) v += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  if (a.numel() == 0) throw Error("mean: empty tensor");
  return sum(a) * (T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> sum_rows(const Tensor<T>& a) {
  require_ndim("sum_rows", a.shape(), 2);
  const std::size_t n = a.dim(0), k = a.dim(1);
  Tensor<T> out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < k; ++j) acc += a[i * k + j];
    out[i] = static_cast<T>(acc);
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, n, k]() {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) an->grad[i * k + j] += on->grad[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> logsumexp_rows(const Tensor<T>& a) {
  require_ndim("logsumexp_rows", a.shape(), 2);
  const std::size_t n = a.dim(0), k = a.dim(1);
  if (k == 0) throw Error("logsumexp_rows: empty rows");
  Tensor<T> out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = a.data().data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    out[i] = static_cast<T>(mx + std::log(s));
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, n, k]() {
      for (std::size_t i = 0; i < n; ++i) {
        const double lse = on->data[i];
        const double g = on->grad[i];
        for (std::size_t j = 0; j < k; ++j) {
          an->grad[i * k + j] += static_cast<T>(g * std::exp(an->data[i * k + j] - lse));
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> l2_normalize_rows(const Tensor<T>& a) {
  if (a.ndim() != 1 && a.ndim() != 2) {
    throw Error("l2_normalize_rows: expected 1-d or 2-d tensor, got " + shape_string(a.shape()));
  }
  const std::size_t n = a.ndim() == 2 ? a.dim(0) : 1;
  const std::size_t c = a.ndim() == 2 ? a.dim(1) : a.dim(0);
  Tensor<T> out(a.shape());
  auto norms = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ss = 0;
    for (std::size_t j = 0; j < c; ++j) ss += static_cast<double>(a[i * c + j]) * a[i * c + j];
    if (!std::isfinite(ss)) throw Error("l2_normalize_rows: row " + std::to_string(i) + " is not finite");
    const double nr = std::max(std::sqrt(ss), kNormFloor);
    (*norms)[i] = nr;
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = static_cast<T>(a[i * c + j] / nr);
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, norms, n, c]() {
      for (std::size_t i = 0; i < n; ++i) {
        // Below the floor the map is a plain scaling.
        const bool clamped = (*norms)[i] == kNormFloor;
        double dot = 0;
        if (!clamped) {
          for (std::size_t j = 0; j < c; ++j) dot += static_cast<double>(on->data[i * c + j]) * on->grad[i * c + j];
        }
        const double inv = 1.0 / (*norms)[i];
        for (std::size_t j = 0; j < c; ++j) {
          an->grad[i * c + j] +=
              static_cast<T>((on->grad[i * c + j] - on->data[i * c + j] * dot) * inv);
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> gather(const Tensor<T>& a, const std::vector<std::size_t>& flat_index) {
  Tensor<T> out(Shape{flat_index.size()});
  for (std::size_t i = 0; i < flat_index.size(); ++i) {
    if (flat_index[i] >= a.numel()) throw Error("gather: index out of range");
    out[i] = a[flat_index[i]];
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, flat_index]() {
      for (std::size_t i = 0; i < flat_index.size(); ++i) an->grad[flat_index[i]] += on->grad[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> index_rows(const Tensor<T>& a, const std::vector<std::size_t>& rows) {
  if (a.ndim() == 0) throw Error("index_rows: scalar input");
  const std::size_t stride = a.numel() / a.dim(0);
  Shape shape = a.shape();
  shape[0] = rows.size();
  Tensor<T> out(shape);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.dim(0)) throw Error("index_rows: row index out of range");
    std::copy_n(a.data().data() + rows[i] * stride, stride, out.data().data() + i * stride);
  }
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on, rows, stride]() {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < stride; ++j) an->grad[rows[i] * stride + j] += on->grad[i * stride + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw Error("concat_cols: no inputs");
  const std::size_t n = parts[0].dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.ndim() < 1 || p.ndim() > 2 || p.dim(0) != n) {
      throw Error("concat_cols: incompatible piece " + shape_string(p.shape()) + " for " +
                  std::to_string(n) + " rows");
    }
    widths.push_back(p.ndim() == 2 ? p.dim(1) : 1);
    total += widths.back();
  }
  Tensor<T> out(Shape{n, total});
  std::size_t off = 0;
  for (std::size_t q = 0; q < parts.size(); ++q) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < widths[q]; ++j) out[i * total + off + j] = parts[q][i * widths[q] + j];
    }
    off += widths[q];
  }
  bool any = false;
  if (active_tape<T>().recording()) {
    for (const auto& p : parts) any = any || p.requires_grad();
  }
  if (any) {
    std::vector<NodePtr<T>> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    auto on = out.node();
    record(out, nodes, [nodes, on, widths, n, total]() {
      std::size_t off = 0;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        if (nodes[q]->requires_grad) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < widths[q]; ++j) {
              nodes[q]->grad[i * widths[q] + j] += on->grad[i * total + off + j];
            }
          }
        }
        off += widths[q];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw Error("reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  }
  Tensor<T> out(std::move(shape), a.values());
  if (wants_tape({&a})) {
    auto an = a.node(), on = out.node();
    record(out, {an}, [an, on]() {
      for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
    });
  }
  return out;
}

#define DCDFA_INSTANTIATE_OPS(T)                                                             \
  template Tensor<T> elementwise(BinaryOp, const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> elementwise(BinaryOp, const Tensor<T>&, T);                             \
  template Tensor<T> elementwise(UnaryOp, const Tensor<T>&);                                 \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                          \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> transpose(const Tensor<T>&);                                            \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,            \
                            std::size_t, std::size_t);                                       \
  template Tensor<T> pool(PoolKind, const Tensor<T>&);                                       \
  template Tensor<T> sum(const Tensor<T>&);                                                  \
  template Tensor<T> mean(const Tensor<T>&);                                                 \
  template Tensor<T> sum_rows(const Tensor<T>&);                                             \
  template Tensor<T> logsumexp_rows(const Tensor<T>&);                                       \
  template Tensor<T> l2_normalize_rows(const Tensor<T>&);                                    \
  template Tensor<T> gather(const Tensor<T>&, const std::vector<std::size_t>&);              \
  template Tensor<T> index_rows(const Tensor<T>&, const std::vector<std::size_t>&);          \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                             \
  template Tensor<T> reshape(const Tensor<T>&, Shape);

DCDFA_INSTANTIATE_OPS(float)
DCDFA_INSTANTIATE_OPS(double)

#undef DCDFA_INSTANTIATE_OPS

}  // namespace dcdfa
