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

#ifndef DCDFA_GRADCHECK_HPP_
#define DCDFA_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "dcdfa/tensor.hpp"

namespace dcdfa {

struct GradCheckOptions {
  double step = 1e-3;
  /// Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

/// Compares reverse-mode gradients of a scalar function against central
/// differences (f(x+h) - f(x-h)) / 2h, evaluated in double precision.
/// Returns max |analytic - numeric| / max(1, |analytic|, |numeric|).
/// The function must be deterministic; it is re-evaluated with the tape off
/// for every perturbed coordinate.
double grad_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> params,
                  const GradCheckOptions& options = {});

}  // namespace dcdfa

#endif  // DCDFA_GRADCHECK_HPP_
