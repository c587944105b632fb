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

#include "dcdfa/optim.hpp"

#include <cmath>

namespace dcdfa {

void adam_step(ParameterList<float>& params, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    state.first_moment.resize(params.size());
    state.second_moment.resize(params.size());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::size_t n = params[i].value.numel();
    if (state.first_moment[i].size() != n) {
      if (!state.first_moment[i].empty()) {
        throw Error("adam_step: moment buffer for '" + params[i].name + "' has " +
                    std::to_string(state.first_moment[i].size()) + " entries, parameter has " +
                    std::to_string(n));
      }
      adam_reset_slot(state, i, n);
    }
    if (params[i].value.has_grad()) {
      for (float g : params[i].value.grad()) {
        if (!std::isfinite(g)) throw Error("adam_step: non-finite gradient in '" + params[i].name + "'");
      }
    }
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value;
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto w = p.data();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g[j];
      const double mj = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      const double vj = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      w[j] = static_cast<float>(w[j] - state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon));
    }
    p.zero_grad();
  }
}

void adam_reset_slot(AdamState& state, std::size_t index, std::size_t numel) {
  if (state.first_moment.size() <= index) {
    state.first_moment.resize(index + 1);
    state.second_moment.resize(index + 1);
  }
  state.first_moment[index].assign(numel, 0.0f);
  state.second_moment[index].assign(numel, 0.0f);
}

void zero_grads(ParameterList<float>& params) {
  for (auto& p : params) p.value.zero_grad();
}

}  // namespace dcdfa
