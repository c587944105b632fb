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

#ifndef DCDFA_ABLATION_HPP_
#define DCDFA_ABLATION_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dcdfa/pipeline.hpp"

namespace dcdfa {

/// Scheme rows of the component, DCDFA and loss ablations (tables 1, 2, 3).
std::vector<std::string> table_schemes(int table);

/// Runs every scheme for seeds base.seed, base.seed + 1, ... Pretraining is
/// shared by all schemes of one seed, and a "-b-inference" row re-evaluates
/// the model trained for the scheme without the suffix. With out_dir set,
/// each run writes to <out_dir>/seed<s>/<scheme>/ and every report is
/// appended to <out_dir>/summary.csv. Reports come back seed-major.
std::vector<MetricsReport> run_ablation(const TrainConfig& base, const std::vector<std::string>& schemes,
                                        std::size_t seeds, const std::string& out_dir = "",
                                        const std::function<void(const MetricsReport&)>& on_report = {});

/// Mean mAP (fraction) of the reports carrying this scheme name.
double mean_map(const std::vector<MetricsReport>& reports, const std::string& scheme);

}  // namespace dcdfa

#endif  // DCDFA_ABLATION_HPP_
