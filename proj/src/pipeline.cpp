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

#include "dcdfa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "dcdfa/checkpoint.hpp"

namespace dcdfa {
namespace {

std::vector<std::size_t> iota_rows(std::size_t first, std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), first);
  return rows;
}

std::vector<std::vector<std::size_t>> group_by_label(const std::vector<int>& labels, std::size_t classes) {
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return members;
}

void require_grad(ModelParams<float>& params) {
  for (auto& p : params.parameters()) p.value.set_requires_grad(true);
}

Tensor<float> normalized(const Tensor<float>& x) {
  NoGradGuard guard;
  return l2_normalize_rows(x);
}

std::vector<ImageMeta> metadata(const std::vector<Sample>& samples) {
  std::vector<ImageMeta> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.identity, s.camera});
  return out;
}

std::vector<int> labels_at(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

Tensor<float> basic_reid_loss(const Tensor<float>& feat, const std::vector<int>& labels,
                              const IdentityHead<float>& head, float margin) {
  return triplet_loss(feat, labels, margin) + identity_ce_loss(classify_identity(feat, head), labels);
}

// Makes the optimizer slots match the parameter list after a head resize;
// the last two slots (the target head) start from zero.
void resize_target_slots(AdamState& adam, const ParameterList<float>& params) {
  adam.first_moment.resize(params.size());
  adam.second_moment.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (adam.first_moment[i].size() != params[i].value.numel()) {
      adam_reset_slot(adam, i, params[i].value.numel());
    }
  }
  const std::size_t n = params.size();
  if (n >= 2 && params[n - 1].name == "target_head.bias") {
    adam_reset_slot(adam, n - 2, params[n - 2].value.numel());
    adam_reset_slot(adam, n - 1, params[n - 1].value.numel());
  }
}

void check_finite(double v, std::int64_t step, const char* stage) {
  if (!std::isfinite(v)) {
    throw Error(std::string(stage) + ": loss diverged at step " + std::to_string(step));
  }
}

const Tensor<float>& find_tensor(const ParameterList<float>& list, const std::string& name) {
  for (const auto& p : list) {
    if (p.name == name) return p.value;
  }
  throw Error("checkpoint: missing tensor " + name);
}

bool has_tensor(const ParameterList<float>& list, const std::string& name) {
  return std::any_of(list.begin(), list.end(), [&](const auto& p) { return p.name == name; });
}

void copy_into(ParameterList<float> dst, const ParameterList<float>& src, const std::string& prefix) {
  for (auto& p : dst) {
    const Tensor<float>& from = find_tensor(src, prefix + p.name);
    if (from.shape() != p.value.shape()) {
      throw Error("checkpoint: " + prefix + p.name + " has shape " + shape_string(from.shape()) + ", expected " +
                  shape_string(p.value.shape()));
    }
    std::copy(from.values().begin(), from.values().end(), p.value.values().begin());
  }
}

void append_adam(ParameterList<float>& out, const AdamState& adam, const std::string& prefix) {
  for (std::size_t i = 0; i < adam.first_moment.size(); ++i) {
    const auto& m = adam.first_moment[i];
    const auto& v = adam.second_moment[i];
    out.push_back({prefix + ".m." + std::to_string(i), Tensor<float>(Shape{m.size()}, m)});
    out.push_back({prefix + ".v." + std::to_string(i), Tensor<float>(Shape{v.size()}, v)});
  }
}

void load_adam(AdamState& adam, const ParameterList<float>& list, const std::string& prefix, std::size_t slots) {
  adam.first_moment.assign(slots, {});
  adam.second_moment.assign(slots, {});
  for (std::size_t i = 0; i < slots; ++i) {
    const std::string m = prefix + ".m." + std::to_string(i);
    if (!has_tensor(list, m)) continue;
    adam.first_moment[i] = find_tensor(list, m).values();
    adam.second_moment[i] = find_tensor(list, prefix + ".v." + std::to_string(i)).values();
  }
}

}  // namespace

ExperimentData make_experiment_data(const TrainConfig& config) {
  config.validate();
  GenerateConfig g;
  g.n_ids_source = config.n_ids_source;
  g.n_ids_target = config.n_ids_target;
  g.imgs_per_id = config.imgs_per_id;
  g.n_cameras = config.n_cameras;
  g.n_eval_ids = config.n_eval_ids;
  g.gap = DomainGap::standard().scaled(static_cast<float>(config.gap_strength));
  g.seed = config.effective_data_seed();
  ExperimentData d;
  d.raw = generate(g);
  d.source_images = stack_images(d.raw.source.samples);
  d.target_images = stack_images(d.raw.target.samples);
  for (const auto& s : d.raw.source.samples) d.source_labels.push_back(s.identity);
  for (const auto& s : d.raw.target.samples) d.target_truth.push_back(s.identity);
  d.source_classes = static_cast<std::size_t>(config.n_ids_source);
  return d;
}

std::vector<std::size_t> sample_pk(const std::vector<std::vector<std::size_t>>& members, std::size_t p,
                                   std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> classes;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (!members[c].empty()) classes.push_back(c);
  }
  if (classes.size() < 2) throw Error("sample_pk: need at least two non-empty classes");
  std::shuffle(classes.begin(), classes.end(), rng);
  std::vector<std::size_t> out;
  out.reserve(p * k);
  for (std::size_t i = 0; i < p; ++i) {
    // With fewer classes than p, classes repeat in shuffled order.
    const auto& pool = members[classes[i % classes.size()]];
    if (pool.size() >= k) {
      std::vector<std::size_t> pick(pool);
      std::shuffle(pick.begin(), pick.end(), rng);
      out.insert(out.end(), pick.begin(), pick.begin() + static_cast<long>(k));
    } else {
      std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
      for (std::size_t j = 0; j < k; ++j) out.push_back(pool[any(rng)]);
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_batch(std::size_t n_source, std::size_t n_target,
                                                            std::mt19937_64& rng) {
  if (n_source != n_target) {
    throw Error("pair_batch: batch sizes differ (" + std::to_string(n_source) + " vs " +
                std::to_string(n_target) + ")");
  }
  std::vector<std::size_t> perm = iota_rows(0, n_target);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> pairs(n_source);
  for (std::size_t m = 0; m < n_source; ++m) pairs[m] = {m, perm[m]};
  return pairs;
}

TrainState pretrain(const TrainConfig& config, const ExperimentData& data, RunLog* log) {
  config.validate();
  TrainState state;
  state.student = init_model(config.model, data.source_classes, 0,
                             sample_rng(config.seed, kInitTag, 0)());
  require_grad(state.student);
  state.adam.learning_rate = config.learning_rate;
  state.tau_adam.learning_rate = config.learning_rate;
  state.tau = Tensor<float>(Shape{1}, static_cast<float>(config.tau_init));

  const auto members = group_by_label(data.source_labels, data.source_classes);
  const std::size_t n = config.batch();
  const std::size_t steps_per_epoch = std::max<std::size_t>(1, data.source_labels.size() / n);
  const auto margin = static_cast<float>(config.triplet_margin);
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      std::mt19937_64 rng = sample_rng(config.seed, kStepTag, static_cast<std::uint64_t>(state.step));
      const auto idx = sample_pk(members, config.p, config.k, rng);
      const auto labels = labels_at(data.source_labels, idx);
      active_tape<float>().clear();
      const Tensor<float> fmap = encode(state.student.encoder, index_rows(data.source_images, idx));
      const Tensor<float> f = pool(PoolKind::kSpatialAvg, fmap);
      std::array<Tensor<float>, 5> terms;
      terms[static_cast<std::size_t>(LossTerm::kBReID)] = basic_reid_loss(f, labels, state.student.source_head, margin);
      LossReport report;
      Tensor<float> loss;
      try {
        loss = total_loss(terms, config.weights, &report);
      } catch (const Error& e) {
        throw Error("pretrain: step " + std::to_string(state.step) + ": " + e.what());
      }
      check_finite(report.total, state.step, "pretrain");
      backward(loss);
      auto params = state.student.parameters();
      adam_step(params, state.adam);
      if (log) log->steps.push_back({state.step, 0, report, state.tau[0]});
      ++state.step;
    }
  }
  active_tape<float>().clear();
  state.teacher = make_teacher(state.student, config.model.ema_momentum);
  const Tensor<float> src = infer_features(state.student, data.source_images);
  const Tensor<float> tgt = infer_features(state.student, data.target_images);
  state.bank = init_bank(src, data.source_labels, data.source_classes, tgt, config.memory_momentum);
  state.bank.freeze_source = config.freeze_source;
  state.pseudo.labels.assign(data.target_truth.size(), kOutlier);
  return state;
}

const ModelParams<float>& inference_model(const TrainState& state, const TrainConfig& config) {
  return config.toggles().mean_teacher ? state.teacher.shadow : state.student;
}

void adapt_round(TrainState& state, const TrainConfig& config, const ExperimentData& data, RunLog* log) {
  const SchemeToggles t = config.toggles();
  const int round = state.round + 1;

  // (1) pseudo labels from the inference network
  ClusterDiagnostics diag;
  const Tensor<float> feats = infer_features(inference_model(state, config), data.target_images);
  state.pseudo = assign_pseudo_labels(feats, config.cluster, round, data.target_truth, &diag);
  const std::size_t kt = state.pseudo.num_clusters;
  if (log) {
    log->rounds.push_back({round, diag, 0.0});
    log->tables.push_back(state.pseudo);
  }

  // (2) relabel memory, fresh target head in student and teacher
  relabel(state.bank, state.pseudo);
  std::mt19937_64 head_rng = sample_rng(config.seed, kRoundTag, static_cast<std::uint64_t>(round));
  state.student.target_head = init_identity_head(kt, config.model.channels(), head_rng);
  state.teacher.shadow.target_head = {state.student.target_head.weight.clone(), state.student.target_head.bias.clone()};
  state.teacher.momentum = config.model.ema_momentum;
  require_grad(state.student);
  resize_target_slots(state.adam, state.student.parameters());
  state.tau.set_requires_grad(t.cid);

  // (3) fine-tune
  const auto src_members = group_by_label(data.source_labels, data.source_classes);
  const auto tgt_members = group_by_label(state.pseudo.labels, kt);
  std::size_t clustered = 0;
  for (int l : state.pseudo.labels) clustered += l != kOutlier;
  if (kt < 2) {
    throw Error("adapt_round: round " + std::to_string(round) + " found " + std::to_string(kt) +
                " cluster; the triplet loss needs at least two");
  }
  const std::size_t n = config.batch();
  const std::size_t steps = static_cast<std::size_t>(config.finetune_epochs) * std::max<std::size_t>(1, clustered / n);
  const auto margin = static_cast<float>(config.triplet_margin);
  const std::vector<std::size_t> src_rows = iota_rows(0, n), tgt_rows = iota_rows(n, n);
  ParameterList<float> tau_params{{"cid.tau", state.tau}};

  for (std::size_t s = 0; s < steps; ++s) {
    std::mt19937_64 rng = sample_rng(config.seed, kStepTag, static_cast<std::uint64_t>(state.step));
    const auto src_idx = sample_pk(src_members, config.p, config.k, rng);
    const auto tgt_idx = sample_pk(tgt_members, config.p, config.k, rng);
    const auto ys = labels_at(data.source_labels, src_idx);
    const auto yt = labels_at(state.pseudo.labels, tgt_idx);

    active_tape<float>().clear();
    Tensor<float> images = index_rows(data.source_images, src_idx);
    const Tensor<float> tgt_images = index_rows(data.target_images, tgt_idx);
    Tensor<float> stacked(Shape{2 * n, images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.values().begin(), images.values().end(), stacked.values().begin());
    std::copy(tgt_images.values().begin(), tgt_images.values().end(),
              stacked.values().begin() + static_cast<long>(images.numel()));

    const Tensor<float> fmap = encode(state.student.encoder, stacked);
    FeatureBundle<float> all;
    if (t.uses_attention()) {
      all = attend_decompose(fmap, state.student.attention);
    } else {
      all.f = pool(PoolKind::kSpatialAvg, fmap);
    }
    const Tensor<float> fs = index_rows(all.f, src_rows);
    const Tensor<float> ft = index_rows(all.f, tgt_rows);

    std::array<Tensor<float>, 5> terms;
    auto term = [&](LossTerm k) -> Tensor<float>& { return terms[static_cast<std::size_t>(k)]; };
    term(LossTerm::kBReID) = basic_reid_loss(fs, ys, state.student.source_head, margin) +
                             basic_reid_loss(ft, yt, state.student.target_head, margin);

    MemoryLossStats mem_stats;
    if (t.memory) {
      std::vector<MemoryQuery> info(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        info[i] = {state.bank.source_key(ys[i]), -1};
        info[n + i] = {state.bank.target_key(yt[i]), static_cast<long>(state.bank.target_entry(tgt_idx[i]))};
      }
      term(LossTerm::kMemory) =
          memory_contrastive_loss(all.f, info, state.bank.stacked(), state.bank.labels(), config.memory, &mem_stats);
    }

    if (t.cid || t.domain) {
      const auto pairs = pair_batch(n, n, rng);
      std::vector<std::size_t> pi(n), pj(n);
      for (std::size_t m = 0; m < n; ++m) {
        pi[m] = pairs[m].first;
        pj[m] = n + pairs[m].second;
      }
      const FeatureBundle<float> bs = all.select(pi);
      const FeatureBundle<float> bt = all.select(pj);
      const Recomposition<float> r = recompose(bs, bt);
      if (t.cid) term(LossTerm::kCID) = cid_loss(RecomposedSet<float>{bs.f, bt.f, r.r_src, r.r_tgt}, state.tau);
      if (t.domain) {
        const double p = config.model.dropout;
        const auto& dc = state.student.domain;
        term(LossTerm::kDomain) =
            domain_loss(classify_domain(bs.f, dc, p, true, &rng), classify_domain(r.r_src, dc, p, true, &rng),
                        classify_domain(bt.f, dc, p, true, &rng), classify_domain(r.r_tgt, dc, p, true, &rng));
      }
    }
    if (t.rreid_b) {
      const Tensor<float> bt = index_rows(all.b, tgt_rows);
      Tensor<float> l = basic_reid_loss(bt, yt, state.student.target_head, margin);
      if (config.rreid_b_source) l = l + basic_reid_loss(index_rows(all.b, src_rows), ys, state.student.source_head, margin);
      term(LossTerm::kRReIDb) = l;
    }

    LossReport report;
    Tensor<float> loss;
    try {
      loss = total_loss(terms, config.weights, &report);
    } catch (const Error& e) {
      throw Error("adapt_round: round " + std::to_string(round) + ", step " + std::to_string(state.step) + ": " +
                  e.what());
    }
    backward(loss);
    auto params = state.student.parameters();
    adam_step(params, state.adam);
    if (t.cid) {
      adam_step(tau_params, state.tau_adam);
      state.tau[0] = std::max(state.tau[0], static_cast<float>(config.tau_min));
    }
    if (t.mean_teacher) ema_update(state.student, state.teacher);
    if (t.memory) {
      // With a mean teacher the bank follows the smoother shadow network.
      const Tensor<float> fn = t.mean_teacher && config.teacher_bank_updates
                                   ? normalized(infer_features(state.teacher.shadow, stacked))
                                   : normalized(all.f.detach());
      const std::size_t c = fn.dim(1);
      for (std::size_t i = 0; i < n; ++i) {
        update(state.bank, static_cast<std::size_t>(ys[i]), fn.data().subspan(i * c, c));
        update(state.bank, state.bank.target_entry(tgt_idx[i]), fn.data().subspan((n + i) * c, c));
      }
    }
    if (log) log->steps.push_back({state.step, round, report, state.tau[0]});
    ++state.step;
  }
  active_tape<float>().clear();
  if (!t.mean_teacher) {
    // Without a mean teacher the shadow just mirrors the student.
    state.teacher.shadow = state.student.clone();
  }
  state.round = round;
}

MetricsReport evaluate_target(const TrainState& state, const TrainConfig& config, const ExperimentData& data,
                              FeatureKind kind) {
  const ModelParams<float>& model = inference_model(state, config);
  const auto& split = data.raw.target_eval;
  const Tensor<float> q = normalized(infer_features(model, stack_images(split.query), kind, config.skip_attention));
  const Tensor<float> g = normalized(infer_features(model, stack_images(split.gallery), kind, config.skip_attention));
  MetricsReport r = evaluate(q, metadata(split.query), g, metadata(split.gallery));
  r.scheme = config.scheme;
  r.seed = config.seed;
  return r;
}

MetricsReport evaluate_source(const TrainState& state, const TrainConfig& config, const ExperimentData& data) {
  const ModelParams<float>& model = inference_model(state, config);
  const auto& split = data.raw.source_eval;
  const Tensor<float> q = normalized(infer_features(model, stack_images(split.query)));
  const Tensor<float> g = normalized(infer_features(model, stack_images(split.gallery)));
  MetricsReport r = evaluate(q, metadata(split.query), g, metadata(split.gallery));
  r.scheme = config.scheme;
  r.seed = config.seed;
  return r;
}

double source_identity_accuracy(const TrainState& state, const ExperimentData& data) {
  NoGradGuard guard;
  const Tensor<float> f = infer_features(state.student, data.source_images);
  const Tensor<float> logits = classify_identity(f, state.student.source_head);
  const std::size_t k = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.source_labels.size(); ++i) {
    const auto row = logits.data().subspan(i * k, k);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += best == data.source_labels[i];
  }
  return double(correct) / double(data.source_labels.size());
}

TrainState clone_state(const TrainState& s) {
  TrainState c = s;
  c.student = s.student.clone();
  c.teacher.shadow = s.teacher.shadow.clone();
  c.bank.source_prototypes = s.bank.source_prototypes.clone();
  c.bank.target_instances = s.bank.target_instances.clone();
  c.tau = s.tau.clone();
  return c;
}

ExperimentResult run_experiment(const TrainConfig& config, const ExperimentData& data, const TrainState* pretrained) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.state = pretrained ? clone_state(*pretrained) : pretrain(config, data, &result.log);
  result.state.bank.momentum = config.memory_momentum;
  result.state.bank.freeze_source = config.freeze_source;
  result.state.adam.learning_rate = config.learning_rate;
  result.state.tau_adam.learning_rate = config.learning_rate;
  const FeatureKind kind = config.eval_kind();
  for (int r = 0; r < config.rounds; ++r) {
    adapt_round(result.state, config, data, &result.log);
    result.log.rounds.back().map = evaluate_target(result.state, config, data, kind).map;
  }
  result.metrics = evaluate_target(result.state, config, data, kind);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.metrics.seconds = config.wallclock_in_metrics ? seconds : 0.0;

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    {
      std::ofstream os(dir / "config.txt");
      os << config_to_text(config);
    }
    const fs::path metrics = dir / "metrics.csv";
    fs::remove(metrics);
    write_metrics(result.metrics, metrics.string());
    write_loss_log((dir / "loss_log.csv").string(), result.log);
    write_round_log((dir / "round_map.csv").string(), result.log);
    for (const auto& table : result.log.tables) {
      write_pseudo_labels_csv((dir / ("pseudo_labels_round" + std::to_string(table.round) + ".csv")).string(), table,
                              data.target_truth);
    }
    save_train_state((dir / "checkpoint").string(), result.state);
    std::ofstream timing(dir / "timing.txt");
    timing << "seconds " << seconds << '\n';
  }
  return result;
}

void save_train_state(const std::string& stem, const TrainState& state) {
  ParameterList<float> out;
  const auto student = state.student.parameters();
  for (const auto& p : student) out.push_back({"student." + p.name, p.value});
  for (const auto& p : state.teacher.shadow.parameters()) out.push_back({"teacher." + p.name, p.value});
  for (const auto& p : bank_tensors(state.bank)) out.push_back(p);
  out.push_back({"cid.tau", state.tau});
  Tensor<float> pseudo(Shape{state.pseudo.labels.size()});
  for (std::size_t i = 0; i < state.pseudo.labels.size(); ++i) pseudo[i] = static_cast<float>(state.pseudo.labels[i]);
  out.push_back({"pseudo.labels", pseudo});
  out.push_back({"state.counters",
                 Tensor<float>(Shape{7}, {static_cast<float>(state.step), static_cast<float>(state.round),
                                          static_cast<float>(state.adam.step), static_cast<float>(state.tau_adam.step),
                                          static_cast<float>(state.pseudo.round),
                                          static_cast<float>(state.pseudo.num_clusters),
                                          static_cast<float>(state.teacher.momentum)})});
  append_adam(out, state.adam, "adam");
  append_adam(out, state.tau_adam, "tau_adam");
  save_checkpoint(stem, out);
}

TrainState load_train_state(const std::string& stem, const TrainConfig& config) {
  const ParameterList<float> in = load_checkpoint(stem);
  const std::size_t ks = find_tensor(in, "student.source_head.weight").dim(0);
  const std::size_t kt =
      has_tensor(in, "student.target_head.weight") ? find_tensor(in, "student.target_head.weight").dim(0) : 0;
  TrainState s;
  s.student = init_model(config.model, ks, kt, 0);
  copy_into(s.student.parameters(), in, "student.");
  require_grad(s.student);
  s.teacher.shadow = init_model(config.model, ks, kt, 0);
  copy_into(s.teacher.shadow.parameters(), in, "teacher.");
  s.bank = bank_from_tensors(in, config.memory_momentum, config.freeze_source);
  s.tau = find_tensor(in, "cid.tau").clone();
  for (float v : find_tensor(in, "pseudo.labels").values()) s.pseudo.labels.push_back(static_cast<int>(v));
  const Tensor<float>& counters = find_tensor(in, "state.counters");
  if (counters.numel() != 7) throw Error("checkpoint: malformed state.counters");
  s.step = static_cast<std::int64_t>(counters[0]);
  s.round = static_cast<int>(counters[1]);
  s.adam.step = static_cast<std::int64_t>(counters[2]);
  s.tau_adam.step = static_cast<std::int64_t>(counters[3]);
  s.pseudo.round = static_cast<int>(counters[4]);
  s.pseudo.num_clusters = static_cast<std::size_t>(counters[5]);
  s.teacher.momentum = counters[6];
  s.adam.learning_rate = config.learning_rate;
  s.tau_adam.learning_rate = config.learning_rate;
  load_adam(s.adam, in, "adam", s.student.parameters().size());
  load_adam(s.tau_adam, in, "tau_adam", 1);
  return s;
}

void write_loss_log(const std::string& path, const RunLog& log) {
  std::ofstream os(path);
  if (!os) throw Error("write_loss_log: cannot open " + path);
  os << "step";
  for (const char* name : kLossTermNames) os << ',' << name;
  os << ",tau\n";
  char buf[64];
  for (const auto& s : log.steps) {
    os << s.step;
    for (double v : s.losses.value) {
      std::snprintf(buf, sizeof(buf), ",%.6g", v);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.6g\n", s.tau);
    os << buf;
  }
  if (!os) throw Error("write_loss_log: write failed for " + path);
}

void write_round_log(const std::string& path, const RunLog& log) {
  std::ofstream os(path);
  if (!os) throw Error("write_round_log: cannot open " + path);
  os << "round,mAP,clusters,outlier_fraction,purity\n";
  char buf[128];
  for (const auto& r : log.rounds) {
    std::snprintf(buf, sizeof(buf), "%d,%.2f,%zu,%.4f,%.4f\n", r.round, 100.0 * r.map, r.clusters.num_clusters,
                  r.clusters.outlier_fraction, r.clusters.purity);
    os << buf;
  }
  if (!os) throw Error("write_round_log: write failed for " + path);
}

}  // namespace dcdfa
