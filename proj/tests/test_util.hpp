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

#ifndef DCDFA_TESTS_TEST_UTIL_HPP_
#define DCDFA_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "dcdfa/tensor.hpp"

// Hand-rolled generators for the property tests.

namespace dcdfa::testing {

template <typename T = float>
Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(u(rng));
  return t;
}

inline std::size_t random_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

template <typename T>
std::vector<double> as_double(const Tensor<T>& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

}  // namespace dcdfa::testing

#endif  // DCDFA_TESTS_TEST_UTIL_HPP_
