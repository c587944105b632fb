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

#include "dcdfa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dcdfa {
namespace {

double eval_no_tape(const std::function<Tensor<double>()>& f) {
  NoGradGuard guard;
  const double v = f().item();
  if (!std::isfinite(v)) throw Error("grad_check: function value is not finite");
  return v;
}

}  // namespace

double grad_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> params,
                  const GradCheckOptions& options) {
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  active_tape<double>().clear();
  Tensor<double> loss = f();
  if (!std::isfinite(loss.item())) throw Error("grad_check: function value is not finite");
  backward(loss);

  std::mt19937_64 rng(options.seed);
  double worst = 0.0;
  for (auto& p : params) {
    std::vector<double> analytic(p.grad().begin(), p.grad().end());
    std::vector<std::size_t> coords(p.numel());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t c : coords) {
      const double orig = p[c];
      p[c] = orig + options.step;
      const double up = eval_no_tape(f);
      p[c] = orig - options.step;
      const double down = eval_no_tape(f);
      p[c] = orig;
      const double numeric = (up - down) / (2.0 * options.step);
      const double denom = std::max({1.0, std::abs(analytic[c]), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic[c] - numeric) / denom);
    }
    p.zero_grad();
  }
  return worst;
}

}  // namespace dcdfa
