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

#include "dcdfa/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dcdfa {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error("config: " + key + " expects an integer, got '" + v + "'");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  if (n < 0) throw Error("config: " + key + " must be non-negative, got " + v);
  return static_cast<std::size_t>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw Error("config: " + key + " expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Builders for the key table.
ConfigKey real(std::string name, std::string help, double TrainConfig::*field) {
  return {name, std::move(help),
          [field, name](TrainConfig& c, const std::string& v) { c.*field = parse_double(name, v); },
          [field](const TrainConfig& c) { return fmt(c.*field); }};
}

ConfigKey integer(std::string name, std::string help, int TrainConfig::*field) {
  return {name, std::move(help),
          [field, name](TrainConfig& c, const std::string& v) { c.*field = static_cast<int>(parse_int(name, v)); },
          [field](const TrainConfig& c) { return std::to_string(c.*field); }};
}

ConfigKey count(std::string name, std::string help, std::size_t TrainConfig::*field) {
  return {name, std::move(help),
          [field, name](TrainConfig& c, const std::string& v) { c.*field = parse_count(name, v); },
          [field](const TrainConfig& c) { return std::to_string(c.*field); }};
}

ConfigKey flag(std::string name, std::string help, bool TrainConfig::*field) {
  return {name, std::move(help),
          [field, name](TrainConfig& c, const std::string& v) { c.*field = parse_bool(name, v); },
          [field](const TrainConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

ConfigKey loss_weight(LossTerm term, std::string name) {
  const auto i = static_cast<std::size_t>(term);
  return {name, std::string("weight of ") + kLossTermNames[i],
          [i, name](TrainConfig& c, const std::string& v) { c.weights.w[i] = parse_double(name, v); },
          [i](const TrainConfig& c) { return fmt(c.weights.w[i]); }};
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> keys;
  keys.push_back({"scheme", "training scheme, e.g. Base, Base+MB, SBase, SBase+DCDFA, SBase+CID+Domain",
                  [](TrainConfig& c, const std::string& v) {
                    parse_scheme(v);
                    c.scheme = v;
                  },
                  [](const TrainConfig& c) { return c.scheme; }});
  keys.push_back({"seed", "training seed (also the data seed unless data_seed is set)",
                  [](TrainConfig& c, const std::string& v) { c.seed = parse_count("seed", v); },
                  [](const TrainConfig& c) { return std::to_string(c.seed); }});
  keys.push_back({"data_seed", "synthetic data seed, 0 means seed",
                  [](TrainConfig& c, const std::string& v) { c.data_seed = parse_count("data_seed", v); },
                  [](const TrainConfig& c) { return std::to_string(c.data_seed); }});
  keys.push_back(integer("n_ids_source", "source training identities", &TrainConfig::n_ids_source));
  keys.push_back(integer("n_ids_target", "target training identities (labels hidden)", &TrainConfig::n_ids_target));
  keys.push_back(integer("imgs_per_id", "images rendered per identity", &TrainConfig::imgs_per_id));
  keys.push_back(integer("n_cameras", "cameras per domain", &TrainConfig::n_cameras));
  keys.push_back(integer("n_eval_ids", "held-out identities per evaluation split", &TrainConfig::n_eval_ids));
  keys.push_back(real("gap_strength", "domain gap scale, 0 renders both domains alike", &TrainConfig::gap_strength));
  keys.push_back(count("p", "identities per batch", &TrainConfig::p));
  keys.push_back(count("k", "instances per identity in a batch", &TrainConfig::k));
  keys.push_back(integer("pretrain_epochs", "source pretraining epochs", &TrainConfig::pretrain_epochs));
  keys.push_back(integer("rounds", "cluster/fine-tune rounds", &TrainConfig::rounds));
  keys.push_back(integer("finetune_epochs", "fine-tune epochs per round", &TrainConfig::finetune_epochs));
  keys.push_back(real("lr", "Adam learning rate", &TrainConfig::learning_rate));
  keys.push_back({"channels", "feature width C (last encoder block)",
                  [](TrainConfig& c, const std::string& v) { c.model.widths[2] = parse_count("channels", v); },
                  [](const TrainConfig& c) { return std::to_string(c.model.widths[2]); }});
  keys.push_back({"reduction", "attention reduction ratio r",
                  [](TrainConfig& c, const std::string& v) { c.model.reduction = parse_count("reduction", v); },
                  [](const TrainConfig& c) { return std::to_string(c.model.reduction); }});
  keys.push_back({"dropout", "domain classifier dropout",
                  [](TrainConfig& c, const std::string& v) { c.model.dropout = parse_double("dropout", v); },
                  [](const TrainConfig& c) { return fmt(c.model.dropout); }});
  keys.push_back({"ema_momentum", "mean-teacher momentum alpha",
                  [](TrainConfig& c, const std::string& v) { c.model.ema_momentum = parse_double("ema_momentum", v); },
                  [](const TrainConfig& c) { return fmt(c.model.ema_momentum); }});
  keys.push_back({"eps", "DBSCAN radius in cosine distance",
                  [](TrainConfig& c, const std::string& v) { c.cluster.eps = parse_double("eps", v); },
                  [](const TrainConfig& c) { return fmt(c.cluster.eps); }});
  keys.push_back({"rho", "if > 0, eps = mean of the smallest rho fraction of pairwise distances, per round",
                  [](TrainConfig& c, const std::string& v) { c.cluster.rho = parse_double("rho", v); },
                  [](const TrainConfig& c) { return fmt(c.cluster.rho); }});
  keys.push_back({"min_pts", "DBSCAN neighbors (self included) for a core point",
                  [](TrainConfig& c, const std::string& v) { c.cluster.min_pts = parse_count("min_pts", v); },
                  [](const TrainConfig& c) { return std::to_string(c.cluster.min_pts); }});
  keys.push_back(real("memory_momentum", "memory bank momentum mu", &TrainConfig::memory_momentum));
  keys.push_back(flag("freeze_source", "keep source prototypes fixed during fine-tuning", &TrainConfig::freeze_source));
  keys.push_back(flag("teacher_bank_updates", "with Mean-Net, update the bank from teacher features",
                      &TrainConfig::teacher_bank_updates));
  keys.push_back({"memory_temperature", "memory contrastive temperature",
                  [](TrainConfig& c, const std::string& v) { c.memory.temperature = parse_double("memory_temperature", v); },
                  [](const TrainConfig& c) { return fmt(c.memory.temperature); }});
  keys.push_back({"circle_margin", "circle reweighting margin",
                  [](TrainConfig& c, const std::string& v) { c.memory.circle_margin = parse_double("circle_margin", v); },
                  [](const TrainConfig& c) { return fmt(c.memory.circle_margin); }});
  keys.push_back({"reweight", "circle reweighting in the memory loss",
                  [](TrainConfig& c, const std::string& v) { c.memory.reweight = parse_bool("reweight", v); },
                  [](const TrainConfig& c) { return std::string(c.memory.reweight ? "true" : "false"); }});
  keys.push_back(real("tau_init", "initial cross-domain loss temperature", &TrainConfig::tau_init));
  keys.push_back(real("tau_min", "lower clamp of the temperature", &TrainConfig::tau_min));
  keys.push_back(real("triplet_margin", "batch-hard triplet margin", &TrainConfig::triplet_margin));
  keys.push_back(loss_weight(LossTerm::kBReID, "w_breid"));
  keys.push_back(loss_weight(LossTerm::kCID, "w_cid"));
  keys.push_back(loss_weight(LossTerm::kDomain, "w_domain"));
  keys.push_back(loss_weight(LossTerm::kRReIDb, "w_rreid_b"));
  keys.push_back(loss_weight(LossTerm::kMemory, "w_mem"));
  keys.push_back(flag("rreid_b_source", "also apply the base-feature ReID loss to source b", &TrainConfig::rreid_b_source));
  keys.push_back(flag("skip_attention", "full-feature inference reads f directly", &TrainConfig::skip_attention));
  keys.push_back({"features", "inference features: full or b_only",
                  [](TrainConfig& c, const std::string& v) {
                    if (v != "full" && v != "b_only") throw Error("config: features must be full or b_only, got '" + v + "'");
                    c.features = v;
                  },
                  [](const TrainConfig& c) { return c.features; }});
  keys.push_back({"out_dir", "directory for logs, metrics and checkpoints (empty: none)",
                  [](TrainConfig& c, const std::string& v) { c.out_dir = v; },
                  [](const TrainConfig& c) { return c.out_dir; }});
  keys.push_back(flag("wallclock_in_metrics", "write measured seconds into metrics.csv instead of 0",
                      &TrainConfig::wallclock_in_metrics));
  return keys;
}

}  // namespace

SchemeToggles parse_scheme(const std::string& scheme) {
  SchemeToggles t;
  std::string body = scheme;
  const std::string suffix = "-b-inference";
  if (body.size() > suffix.size() && body.ends_with(suffix)) {
    t.b_only_inference = true;
    body.resize(body.size() - suffix.size());
  }
  std::stringstream ss(body);
  std::string token;
  bool has_base = false;
  while (std::getline(ss, token, '+')) {
    if (token == "Base") {
      has_base = true;
    } else if (token == "SBase") {
      has_base = true;
      t.memory = t.mean_teacher = true;
    } else if (token == "MB") {
      t.memory = true;
    } else if (token == "MeanNet" || token == "Mean-Net") {
      t.mean_teacher = true;
    } else if (token == "DCDFA") {
      t.cid = t.domain = t.rreid_b = true;
    } else if (token == "CID") {
      t.cid = true;
    } else if (token == "Domain") {
      t.domain = true;
    } else if (token == "RReIDb" || token == "RReID") {
      t.rreid_b = true;
    } else {
      throw Error("unknown scheme token '" + token + "' in '" + scheme + "'");
    }
  }
  if (!has_base) throw Error("scheme '" + scheme + "' must start from Base or SBase");
  return t;
}

FeatureKind TrainConfig::eval_kind() const {
  return (features == "b_only" || toggles().b_only_inference) ? FeatureKind::kBaseOnly : FeatureKind::kFull;
}

void TrainConfig::validate() const {
  parse_scheme(scheme);
  if (p < 2 || k < 2) throw Error("config: batches need p >= 2 and k >= 2 for the triplet loss");
  if (n_ids_source < 0 || static_cast<std::size_t>(n_ids_source) < p) throw Error("config: fewer source identities than p");
  if (pretrain_epochs < 0 || rounds < 0 || finetune_epochs < 0) throw Error("config: negative epoch or round count");
  if (!(learning_rate > 0)) throw Error("config: lr must be positive");
  if (!(cluster.eps > 0) || cluster.min_pts < 1) throw Error("config: need eps > 0 and min_pts >= 1");
  if (cluster.rho < 0 || cluster.rho > 1) throw Error("config: rho outside [0, 1]");
  if (memory_momentum < 0 || memory_momentum > 1) throw Error("config: memory_momentum outside [0, 1]");
  if (model.ema_momentum < 0 || model.ema_momentum > 1) throw Error("config: ema_momentum outside [0, 1]");
  if (!(tau_min > 0) || tau_init < tau_min) throw Error("config: need 0 < tau_min <= tau_init");
  if (gap_strength < 0) throw Error("config: gap_strength must be non-negative");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void set_config_value(TrainConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw Error("config: unknown key '" + key + "'");
}

void apply_config_file(TrainConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config: " + path + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::string config_to_text(const TrainConfig& config) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

}  // namespace dcdfa
