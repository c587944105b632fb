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

#include "dcdfa/ablation.hpp"

#include <chrono>
#include <filesystem>
#include <map>

namespace dcdfa {
namespace {

const std::string kBOnlySuffix = "-b-inference";

std::string training_scheme(const std::string& scheme) {
  if (scheme.size() > kBOnlySuffix.size() && scheme.ends_with(kBOnlySuffix)) {
    return scheme.substr(0, scheme.size() - kBOnlySuffix.size());
  }
  return scheme;
}

}  // namespace

std::vector<std::string> table_schemes(int table) {
  switch (table) {
    case 1:
      return {"Base", "Base+MB", "Base+MeanNet", "SBase"};
    case 2:
      return {"SBase", "SBase+DCDFA-b-inference", "SBase+DCDFA"};
    case 3:
      return {"SBase", "SBase+CID", "SBase+CID+RReIDb", "SBase+CID+Domain", "SBase+DCDFA"};
    default:
      throw Error("ablation: unknown table " + std::to_string(table) + " (expected 1, 2 or 3)");
  }
}

std::vector<MetricsReport> run_ablation(const TrainConfig& base, const std::vector<std::string>& schemes,
                                        std::size_t seeds, const std::string& out_dir,
                                        const std::function<void(const MetricsReport&)>& on_report) {
  namespace fs = std::filesystem;
  for (const auto& s : schemes) parse_scheme(s);
  std::vector<MetricsReport> reports;
  const std::string summary = out_dir.empty() ? "" : (fs::path(out_dir) / "summary.csv").string();
  if (!summary.empty()) {
    fs::create_directories(out_dir);
    fs::remove(summary);
  }
  for (std::size_t i = 0; i < seeds; ++i) {
    TrainConfig seed_config = base;
    seed_config.seed = base.seed + i;
    if (base.data_seed != 0) seed_config.data_seed = base.data_seed + i;
    seed_config.out_dir.clear();
    const ExperimentData data = make_experiment_data(seed_config);
    const TrainState pretrained = pretrain(seed_config, data);
    std::map<std::string, TrainState> trained;
    for (const auto& scheme : schemes) {
      const auto start = std::chrono::steady_clock::now();
      TrainConfig config = seed_config;
      config.scheme = training_scheme(scheme);
      if (!out_dir.empty()) {
        config.out_dir = (fs::path(out_dir) / ("seed" + std::to_string(config.seed)) / config.scheme).string();
      }
      auto it = trained.find(config.scheme);
      if (it == trained.end()) {
        it = trained.emplace(config.scheme, run_experiment(config, data, &pretrained).state).first;
      }
      config.scheme = scheme;
      MetricsReport report = evaluate_target(it->second, config, data, config.eval_kind());
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.seconds = base.wallclock_in_metrics ? seconds : 0.0;
      if (!summary.empty()) write_metrics(report, summary);
      if (on_report) on_report(report);
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

double mean_map(const std::vector<MetricsReport>& reports, const std::string& scheme) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : reports) {
    if (r.scheme != scheme) continue;
    sum += r.map;
    ++n;
  }
  if (n == 0) throw Error("mean_map: no reports for scheme " + scheme);
  return sum / double(n);
}

}  // namespace dcdfa
