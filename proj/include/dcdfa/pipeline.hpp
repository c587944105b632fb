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

#ifndef DCDFA_PIPELINE_HPP_
#define DCDFA_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dcdfa/clustering.hpp"
#include "dcdfa/config.hpp"
#include "dcdfa/eval.hpp"
#include "dcdfa/memory_bank.hpp"
#include "dcdfa/model.hpp"
#include "dcdfa/synth_data.hpp"

namespace dcdfa {

/// Stream tags for sample_rng: per optimizer step, per round, and the
/// model initialization. Distinct from the data generator's tags.
inline constexpr std::uint64_t kStepTag = 101;
inline constexpr std::uint64_t kRoundTag = 102;
inline constexpr std::uint64_t kInitTag = 103;

/// Images and labels of one experiment, stacked once.
struct ExperimentData {
  SyntheticData raw;
  Tensor<float> source_images;  // [N_s, 3, H, W]
  Tensor<float> target_images;  // [N_t, 3, H, W]
  std::vector<int> source_labels;  // 0..K_s-1
  std::vector<int> target_truth;   // hidden identities, diagnostics only
  std::size_t source_classes = 0;
};

ExperimentData make_experiment_data(const TrainConfig& config);

struct TrainState {
  ModelParams<float> student;
  MeanTeacherState teacher;
  MemoryBank bank;
  PseudoLabelTable pseudo;
  AdamState adam;
  AdamState tau_adam;
  Tensor<float> tau;  // [1], trainable temperature of the cross-domain loss
  std::int64_t step = 0;
  int round = 0;
};

/// Loss breakdown of one optimizer step.
struct StepLog {
  std::int64_t step = 0;
  int round = 0;
  LossReport losses;
  double tau = 0;
};

struct RoundLog {
  int round = 0;
  ClusterDiagnostics clusters;
  double map = 0;  // target eval mAP after the round, fraction
};

/// Collected logs; written to CSV by run_experiment when out_dir is set.
struct RunLog {
  std::vector<StepLog> steps;
  std::vector<RoundLog> rounds;
  std::vector<PseudoLabelTable> tables;
};

/// Source batch of P identities x K instances. Identities are drawn without
/// replacement; instances without replacement when the class is big enough.
std::vector<std::size_t> sample_pk(const std::vector<std::vector<std::size_t>>& members, std::size_t p,
                                   std::size_t k, std::mt19937_64& rng);

/// Uniformly random perfect matching between two batches of equal size n:
/// pair m is (m, perm[m]).
std::vector<std::pair<std::size_t, std::size_t>> pair_batch(std::size_t n_source, std::size_t n_target,
                                                            std::mt19937_64& rng);

/// Source-only pretraining with the basic ReID loss on f, then a teacher
/// copy and a memory bank built from the pretrained features.
TrainState pretrain(const TrainConfig& config, const ExperimentData& data, RunLog* log = nullptr);

/// One cluster + fine-tune round.
void adapt_round(TrainState& state, const TrainConfig& config, const ExperimentData& data,
                 RunLog* log = nullptr);

/// The network used for clustering and inference under the config's scheme.
const ModelParams<float>& inference_model(const TrainState& state, const TrainConfig& config);

/// Metrics on the target evaluation split.
MetricsReport evaluate_target(const TrainState& state, const TrainConfig& config, const ExperimentData& data,
                              FeatureKind kind);

/// Metrics on the held-out source evaluation split.
MetricsReport evaluate_source(const TrainState& state, const TrainConfig& config, const ExperimentData& data);

/// Fraction of source training images whose identity-head argmax is right.
double source_identity_accuracy(const TrainState& state, const ExperimentData& data);

struct ExperimentResult {
  MetricsReport metrics;  // final, with the config's inference features
  TrainState state;
  RunLog log;
};

/// Pretrain (or start from a copy of pretrained), run all rounds, evaluate.
/// With out_dir set, writes config.txt, metrics.csv, loss_log.csv,
/// round_map.csv, pseudo_labels_round<r>.csv and the checkpoint.
ExperimentResult run_experiment(const TrainConfig& config, const ExperimentData& data,
                                const TrainState* pretrained = nullptr);

/// Deep copy; the result shares no storage with the input.
TrainState clone_state(const TrainState& state);

/// "<stem>.index" and "<stem>.bin" with student, teacher, bank, optimizer
/// moments, temperature, pseudo labels and counters.
void save_train_state(const std::string& stem, const TrainState& state);
TrainState load_train_state(const std::string& stem, const TrainConfig& config);

void write_loss_log(const std::string& path, const RunLog& log);
void write_round_log(const std::string& path, const RunLog& log);

}  // namespace dcdfa

#endif  // DCDFA_PIPELINE_HPP_
