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

#ifndef DCDFA_DIAGNOSTICS_HPP_
#define DCDFA_DIAGNOSTICS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dcdfa {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0;  // worst error observed (or mismatch count)
  std::size_t trials = 0;
  std::string detail;
};

/// Finite-difference checks in double precision of every loss and of the
/// attention/recomposition path, each on configs random configurations.
/// value is the worst relative error; passed means value < tolerance.
std::vector<CheckResult> run_gradient_suite(std::size_t configs = 20, std::uint64_t seed = 7,
                                            double tolerance = 1e-4);

/// Optimized kernels against the naive references: matmul and conv2d
/// (tolerance 1e-5), DBSCAN on 50 instances, evaluate() on 100 instances.
std::vector<CheckResult> run_selftest(std::uint64_t seed = 11);

}  // namespace dcdfa

#endif  // DCDFA_DIAGNOSTICS_HPP_
