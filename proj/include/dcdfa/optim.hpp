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

#ifndef DCDFA_OPTIM_HPP_
#define DCDFA_OPTIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dcdfa/tensor.hpp"

namespace dcdfa {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
};

template <typename T>
using ParameterList = std::vector<Parameter<T>>;

/// Adam moments, keyed positionally to the parameter list they were built for.
struct AdamState {
  double learning_rate = 0.00035;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
};

/// One bias-corrected Adam update from the gradients stored in the
/// parameters. Gradients are zeroed afterwards. Parameters without a
/// gradient buffer are treated as having a zero gradient.
void adam_step(ParameterList<float>& params, AdamState& state);

/// Re-creates the moment buffers for one parameter, e.g. after a head resize.
void adam_reset_slot(AdamState& state, std::size_t index, std::size_t numel);

void zero_grads(ParameterList<float>& params);

}  // namespace dcdfa

#endif  // DCDFA_OPTIM_HPP_
