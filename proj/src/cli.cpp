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

#include "dcdfa/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dcdfa/ablation.hpp"
#include "dcdfa/diagnostics.hpp"
#include "dcdfa/pipeline.hpp"

namespace dcdfa {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_out) {
  cmd->add_option("-c,--config", opts.config_file, "key = value run config file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", opts.overrides, "override a config key, key=value (repeatable)");
  if (with_out) cmd->add_option("-o,--out", opts.out_dir, "output directory");
}

TrainConfig resolve(const CommonOptions& opts) {
  TrainConfig config;
  if (!opts.config_file.empty()) apply_config_file(config, opts.config_file);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

void print_metrics(std::ostream& out, const MetricsReport& r) {
  out << r.scheme << " seed " << r.seed << ": mAP " << percent(r.map) << "  R1 " << percent(r.rank1) << "  R5 "
      << percent(r.rank5) << "  R10 " << percent(r.rank10);
  if (r.excluded_queries > 0) out << "  (" << r.excluded_queries << " queries without matches)";
  out << '\n';
}

int report_checks(std::ostream& out, const std::vector<CheckResult>& results, const char* what) {
  int failed = 0;
  for (const auto& r : results) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", r.value);
    out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << what << " " << buf << "  (" << r.trials << " trials)";
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
    failed += !r.passed;
  }
  return failed;
}

void gen_data(const TrainConfig& config, const std::string& out_dir, std::ostream& out) {
  if (out_dir.empty()) throw Error("gen-data needs --out");
  fs::create_directories(out_dir);
  const ExperimentData d = make_experiment_data(config);
  const fs::path dir(out_dir);
  save_dataset((dir / "source_train").string(), d.raw.source.samples);
  save_dataset((dir / "target_train").string(), d.raw.target.samples);
  save_dataset((dir / "source_query").string(), d.raw.source_eval.query);
  save_dataset((dir / "source_gallery").string(), d.raw.source_eval.gallery);
  save_dataset((dir / "target_query").string(), d.raw.target_eval.query);
  save_dataset((dir / "target_gallery").string(), d.raw.target_eval.gallery);
  out << "wrote " << d.raw.source.size() << " source and " << d.raw.target.size() << " target training images, "
      << d.raw.target_eval.query.size() << " + " << d.raw.target_eval.gallery.size()
      << " target eval images to " << out_dir << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disentanglement-based cross-domain feature augmentation on a synthetic ReID task"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* gen = app.add_subcommand("gen-data", "render the synthetic datasets to disk");
  add_common(gen, opts, true);

  auto* pre = app.add_subcommand("pretrain", "train on the labeled source domain");
  add_common(pre, opts, true);

  auto* adapt = app.add_subcommand("adapt", "cluster + fine-tune rounds on the target domain");
  add_common(adapt, opts, true);
  std::string from;
  adapt->add_option("--from", from, "pretrain checkpoint stem (pretrains from scratch when omitted)");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the target query/gallery split");
  add_common(ev, opts, false);
  std::string checkpoint, features = "full", metrics_path;
  ev->add_option("--checkpoint", checkpoint, "checkpoint stem")->required();
  ev->add_option("--features", features, "inference features")->check(CLI::IsMember({"full", "b_only"}));
  ev->add_option("--metrics", metrics_path, "append the report to this CSV");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  std::size_t grad_configs = 20;
  grad->add_option("--configs", grad_configs, "random configurations per loss");

  auto* abl = app.add_subcommand("ablate", "sweep the scheme rows of one ablation table over seeds");
  add_common(abl, opts, true);
  int table = 1;
  std::size_t seeds = 3;
  abl->add_option("--table", table, "1: components, 2: DCDFA, 3: loss terms")->check(CLI::IsMember({1, 2, 3}));
  abl->add_option("--seeds", seeds, "number of seeds");

  auto* self = app.add_subcommand("selftest", "optimized kernels against naive references");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen) {
      gen_data(resolve(opts), opts.out_dir, out);
    } else if (*pre) {
      TrainConfig config = resolve(opts);
      const ExperimentData data = make_experiment_data(config);
      RunLog log;
      const TrainState state = pretrain(config, data, &log);
      out << "source identity accuracy " << percent(source_identity_accuracy(state, data)) << "%\n";
      config.scheme = "Base";
      MetricsReport src = evaluate_source(state, config, data);
      src.scheme = "source-eval";
      print_metrics(out, src);
      MetricsReport tgt = evaluate_target(state, config, data, FeatureKind::kFull);
      tgt.scheme = "source-only";
      print_metrics(out, tgt);
      if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        const fs::path dir(opts.out_dir);
        save_train_state((dir / "pretrain").string(), state);
        write_loss_log((dir / "pretrain_loss_log.csv").string(), log);
        const fs::path metrics = dir / "metrics.csv";
        fs::remove(metrics);
        write_metrics(tgt, metrics.string());
      }
    } else if (*adapt) {
      TrainConfig config = resolve(opts);
      if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
      const ExperimentData data = make_experiment_data(config);
      ExperimentResult result;
      if (from.empty()) {
        result = run_experiment(config, data);
      } else {
        const TrainState start = load_train_state(from, config);
        result = run_experiment(config, data, &start);
      }
      for (const auto& r : result.log.rounds) {
        out << "round " << r.round << ": " << r.clusters.num_clusters << " clusters, outliers "
            << percent(r.clusters.outlier_fraction) << "%, purity " << percent(r.clusters.purity) << "%, mAP "
            << percent(r.map) << '\n';
      }
      print_metrics(out, result.metrics);
    } else if (*ev) {
      TrainConfig config = resolve(opts);
      config.features = features;
      const ExperimentData data = make_experiment_data(config);
      const TrainState state = load_train_state(checkpoint, config);
      MetricsReport r = evaluate_target(state, config, data, config.eval_kind());
      if (config.eval_kind() == FeatureKind::kBaseOnly && !config.toggles().b_only_inference) {
        r.scheme += "-b-inference";
      }
      print_metrics(out, r);
      if (!metrics_path.empty()) write_metrics(r, metrics_path);
    } else if (*grad) {
      const int failed = report_checks(out, run_gradient_suite(grad_configs), "max rel err");
      if (failed > 0) {
        err << failed << " gradient check(s) failed\n";
        return 1;
      }
    } else if (*abl) {
      const TrainConfig config = resolve(opts);
      const auto schemes = table_schemes(table);
      const auto reports =
          run_ablation(config, schemes, seeds, opts.out_dir, [&](const MetricsReport& r) { print_metrics(out, r); });
      for (const auto& s : schemes) out << "mean " << s << ": mAP " << percent(mean_map(reports, s)) << '\n';
    } else if (*self) {
      const int failed = report_checks(out, run_selftest(), "worst");
      if (failed > 0) {
        err << failed << " self-test check(s) failed\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace dcdfa
