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

// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
//   acceptance [out_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dcdfa/ablation.hpp"
#include "dcdfa/cli.hpp"
#include "dcdfa/diagnostics.hpp"
#include "dcdfa/eval.hpp"
#include "dcdfa/losses.hpp"
#include "dcdfa/model.hpp"
#include "dcdfa/ops.hpp"
#include "dcdfa/pipeline.hpp"

namespace dcdfa {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

struct Gate {
  int failed = 0;
  void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail << std::endl;
    failed += !pass;
  }
};

void gradient_suite(Gate& gate) {
  const auto start = Clock::now();
  const auto results = run_gradient_suite(20);
  const double elapsed = seconds_since(start);
  bool pass = elapsed < 120;
  std::string detail;
  for (const auto& r : results) {
    pass = pass && r.passed && r.trials >= 20;
    detail += r.name + " " + fmt("%.2e", r.value) + ", ";
  }
  gate.report(1, "gradient checks", pass, detail + fmt("%.1f s", elapsed));
}

void invariants(Gate& gate) {
  constexpr std::size_t kHalf = 500;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<float> pixel(0.0f, 1.0f);
  auto images = [&] {
    Tensor<float> t(Shape{kHalf, kImageChannels, kImageHeight, kImageWidth});
    for (auto& v : t.values()) v = pixel(rng);
    return t;
  };
  const Tensor<float> src_images = images(), tgt_images = images();
  const ModelParams<float> model = init_model(ModelConfig{}, 8, 0, 5);

  NoGradGuard no_grad;
  double decomposition = 0, skip = 0, conservation = 0;
  for (std::size_t lo = 0; lo < kHalf; lo += 100) {
    std::vector<std::size_t> rows(100);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = lo + i;
    const auto bs = attend_decompose(encode(model.encoder, index_rows(src_images, rows)), model.attention);
    const auto bt = attend_decompose(encode(model.encoder, index_rows(tgt_images, rows)), model.attention);
    for (const auto* b : {&bs, &bt}) {
      for (std::size_t i = 0; i < b->f.numel(); ++i) {
        decomposition = std::max(decomposition, double(std::abs(b->b[i] + b->e[i] - b->f[i])));
      }
    }
    const auto r = recompose(bs, bt);
    for (std::size_t i = 0; i < r.r_src.numel(); ++i) {
      conservation =
          std::max(conservation, double(std::abs(r.r_tgt[i] + r.r_src[i] - bs.f[i] - bt.f[i])));
    }
  }
  for (const auto* imgs : {&src_images, &tgt_images}) {
    const auto on = infer_features(model, *imgs, FeatureKind::kFull, true);
    const auto off = infer_features(model, *imgs, FeatureKind::kFull, false);
    for (std::size_t i = 0; i < on.numel(); ++i) skip = std::max(skip, double(std::abs(on[i] - off[i])));
  }
  const bool pass = decomposition <= 1e-6 && skip <= 1e-6 && conservation <= 1e-6;
  gate.report(2, "algebraic invariants", pass,
              "1000 images, |b+e-f| " + fmt("%.2e", decomposition) + ", skip on/off " + fmt("%.2e", skip) +
                  ", conservation " + fmt("%.2e", conservation));
}

void oracles(Gate& gate) {
  bool pass = true;
  std::string detail;
  for (const auto& r : run_selftest()) {
    pass = pass && r.passed;
    detail += r.name + " " + fmt("%.2e", r.value) + " (" + std::to_string(r.trials) + "), ";
  }
  gate.report(3, "oracle equivalence", pass, detail.substr(0, detail.size() - 2));
}


void closed_forms(Gate& gate) {
  const Tensor<double> tau(Shape{1}, {1.0});
  const Tensor<double> v(Shape{3, 4}, {0.3, -1.2, 0.7, 2.0, 1.1, 0.0, -0.4, 0.5, -0.9, 0.8, 0.2, -0.6});
  const double cid_equal = cid_loss(RecomposedSet<double>{v, v, v, v}, tau).item();
  const double cid_anchor = cid_anchor_terms(Tensor<double>(Shape{1}, {0.9}), Tensor<double>(Shape{1}, {0.1}),
                                             Tensor<double>(Shape{1}, {-0.2}), tau)
                                .item();
  auto p = [](double x) { return Tensor<double>(Shape{1}, {x}); };
  const double dom_half = domain_loss(p(0.5), p(0.5), p(0.5), p(0.5)).item();
  const double dom_example = domain_loss(p(0.9), p(0.8), p(0.3), p(0.2)).item();
  const Tensor<float> q(Shape{1, 2}, {1.0f, 0.0f});
  Tensor<float> g(Shape{4, 2});
  for (std::size_t i = 0; i < 4; ++i) {
    g[2 * i] = std::cos(0.1f * float(i + 1));
    g[2 * i + 1] = std::sin(0.1f * float(i + 1));
  }
  const double ap = evaluate(q, {{1, 0}}, g, {{1, 1}, {2, 1}, {1, 2}, {3, 1}}).map;

  const bool pass = std::abs(cid_equal - std::log(3.0)) <= 1e-6 && std::abs(dom_half - std::log(2.0)) <= 1e-6 &&
                    std::abs(cid_anchor - 0.578) <= 1e-3 && std::abs(dom_example - 0.2271) <= 1e-3 &&
                    std::abs(ap - 0.8333) <= 1e-3;
  gate.report(4, "closed-form values", pass,
              "cid " + fmt("%.9f", cid_equal) + " (log 3), domain " + fmt("%.9f", dom_half) + " (log 2), anchor " +
                  fmt("%.4f", cid_anchor) + ", domain example " + fmt("%.4f", dom_example) + ", AP " +
                  fmt("%.4f", ap));
}

std::string points(double fraction) { return fmt("%.2f", 100 * fraction); }

void sweeps(Gate& gate, const fs::path& out) {
  std::vector<std::string> schemes = table_schemes(1);
  for (const auto& s : table_schemes(2)) {
    if (std::find(schemes.begin(), schemes.end(), s) == schemes.end()) schemes.push_back(s);
  }
  const auto start = Clock::now();
  const auto reports = run_ablation(TrainConfig{}, schemes, 3, (out / "sweep").string(), [](const MetricsReport& r) {
    std::cout << "  " << r.scheme << " seed " << r.seed << ": mAP " << points(r.map) << std::endl;
  });
  const double elapsed = seconds_since(start);
  auto m = [&](const std::string& s) { return 100 * mean_map(reports, s); };

  const double dcdfa_gain = m("SBase+DCDFA") - m("SBase");
  gate.report(5, "DCDFA over SBase", dcdfa_gain >= 2.0 && elapsed < 1800,
              "SBase " + fmt("%.2f", m("SBase")) + ", SBase+DCDFA " + fmt("%.2f", m("SBase+DCDFA")) + ", delta " +
                  fmt("%+.2f", dcdfa_gain) + " (need >= +2.00), sweep of " + std::to_string(schemes.size()) +
                  " schemes x 3 seeds " + fmt("%.0f s", elapsed));

  const double base_gap = m("SBase") - m("Base");
  const double mb = m("Base+MB") - m("Base"), mean_net = m("Base+MeanNet") - m("Base");
  gate.report(6, "component ablation", base_gap >= 1.0 && mb >= -0.5 && mean_net >= -0.5,
              "Base " + fmt("%.2f", m("Base")) + ", SBase " + fmt("%+.2f", base_gap) + ", MB " + fmt("%+.2f", mb) +
                  ", MeanNet " + fmt("%+.2f", mean_net));

  const double b_drop = m("SBase+DCDFA") - m("SBase+DCDFA-b-inference");
  gate.report(7, "b-only inference", b_drop >= 1.0,
              "full " + fmt("%.2f", m("SBase+DCDFA")) + ", b only " + fmt("%.2f", m("SBase+DCDFA-b-inference")) +
                  ", drop " + fmt("%.2f", b_drop) + " (need >= 1.00)");
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Compares every file of a against b; config.txt records the output path
/// and timing.txt the wall clock, so both are skipped.
std::size_t compare_dirs(const fs::path& a, const fs::path& b, std::size_t* files) {
  std::size_t mismatches = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name == "config.txt" || name == "timing.txt") continue;
    ++*files;
    if (!fs::exists(b / name) || read_bytes(entry.path()) != read_bytes(b / name)) {
      std::cout << "  differs: " << name << std::endl;
      ++mismatches;
    }
  }
  return mismatches;
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"dcdfa"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  return run_cli(static_cast<int>(argv.size()), argv.data(), sink, std::cerr);
}

void determinism(Gate& gate, const fs::path& out) {
  bool ran = true;
  std::size_t files = 0, mismatches = 0;
  for (const std::string cmd : {"pretrain", "adapt"}) {
    const fs::path a = out / (cmd + "_a"), b = out / (cmd + "_b");
    ran = ran && cli({cmd, "-o", a.string()}) == 0 && cli({cmd, "-o", b.string()}) == 0;
    if (ran) mismatches += compare_dirs(a, b, &files);
  }
  const fs::path ma = out / "eval_a.csv", mb = out / "eval_b.csv";
  const std::string ckpt = (out / "adapt_a" / "checkpoint").string();
  ran = ran && cli({"eval", "--checkpoint", ckpt, "--metrics", ma.string()}) == 0 &&
        cli({"eval", "--checkpoint", ckpt, "--metrics", mb.string()}) == 0;
  ++files;
  if (read_bytes(ma) != read_bytes(mb)) ++mismatches;
  gate.report(8, "determinism", ran && mismatches == 0,
              "pretrain, adapt and eval run twice, " + std::to_string(files) + " files compared, " +
                  std::to_string(mismatches) + " differ");
}

}  // namespace
}  // namespace dcdfa

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  try {
    fs::remove_all(out);
    fs::create_directories(out);
    dcdfa::Gate gate;
    dcdfa::gradient_suite(gate);
    dcdfa::invariants(gate);
    dcdfa::oracles(gate);
    dcdfa::closed_forms(gate);
    dcdfa::sweeps(gate, out);
    dcdfa::determinism(gate, out);
    std::cout << (gate.failed == 0 ? "all criteria passed" : std::to_string(gate.failed) + " criterion(s) failed")
              << std::endl;
    return gate.failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
