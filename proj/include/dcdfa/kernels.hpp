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

#ifndef DCDFA_KERNELS_HPP_
#define DCDFA_KERNELS_HPP_

#include <cstddef>
#include <vector>

// Raw loops behind the tensor ops. Row-major, no allocation policy.
namespace dcdfa::kernels {

/// C[m x n] = A[m x k] * B[k x n] (or C += ... when accumulate). Each output
/// row is accumulated in double in fixed k order, so results are
/// reproducible bit for bit.
template <typename T>
void gemm(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c,
          bool accumulate) {
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (accumulate) {
      for (std::size_t j = 0; j < n; ++j) acc[j] = crow[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) acc[j] = 0.0;
    }
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += av * static_cast<double>(brow[j]);
    }
    for (std::size_t j = 0; j < n; ++j) crow[j] = static_cast<T>(acc[j]);
  }
}

template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* src, T* dst) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
  }
}

struct ConvGeometry {
  std::size_t batch, channels, height, width, kh, kw, stride, padding;
  std::size_t out_h() const { return (height + 2 * padding - kh) / stride + 1; }
  std::size_t out_w() const { return (width + 2 * padding - kw) / stride + 1; }
};

/// cols[(c*kh + i)*kw + j][b*plane + oy*out_w + ox], zero outside the image.
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* cols) {
  const std::size_t ho = g.out_h(), wo = g.out_w(), plane = ho * wo;
  const std::size_t row_len = g.batch * plane;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        T* row = cols + ((c * g.kh + i) * g.kw + j) * row_len;
        for (std::size_t b = 0; b < g.batch; ++b) {
          const T* img = x + (b * g.channels + c) * g.height * g.width;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + i) - static_cast<long>(g.padding);
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + j) - static_cast<long>(g.padding);
              const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(g.height) &&
                                  ix < static_cast<long>(g.width);
              row[b * plane + oy * wo + ox] = inside ? img[iy * g.width + ix] : T(0);
            }
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters column gradients back onto the image grid.
template <typename T>
void col2im_add(const ConvGeometry& g, const T* cols, T* dx) {
  const std::size_t ho = g.out_h(), wo = g.out_w(), plane = ho * wo;
  const std::size_t row_len = g.batch * plane;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const T* row = cols + ((c * g.kh + i) * g.kw + j) * row_len;
        for (std::size_t b = 0; b < g.batch; ++b) {
          T* img = dx + (b * g.channels + c) * g.height * g.width;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + i) - static_cast<long>(g.padding);
            if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + j) - static_cast<long>(g.padding);
              if (ix < 0 || ix >= static_cast<long>(g.width)) continue;
              img[iy * g.width + ix] += row[b * plane + oy * wo + ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace dcdfa::kernels

#endif  // DCDFA_KERNELS_HPP_
