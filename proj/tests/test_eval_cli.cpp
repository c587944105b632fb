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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dcdfa/cli.hpp"
#include "dcdfa/eval.hpp"
#include "dcdfa/ops.hpp"
#include "dcdfa/reference.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace dcdfa {
namespace {

namespace fs = std::filesystem;
using testing::random_size;

// Features on the unit circle at the given angles (radians).
Tensor<float> angles(const std::vector<double>& a) {
  Tensor<float> t(Shape{a.size(), 2});
  for (std::size_t i = 0; i < a.size(); ++i) {
    t[2 * i] = static_cast<float>(std::cos(a[i]));
    t[2 * i + 1] = static_cast<float>(std::sin(a[i]));
  }
  return t;
}

std::vector<std::vector<double>> rows(const Tensor<float>& t) {
  std::vector<std::vector<double>> out(t.dim(0));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    out[i].assign(t.values().begin() + static_cast<long>(i * t.dim(1)),
                  t.values().begin() + static_cast<long>((i + 1) * t.dim(1)));
  }
  return out;
}

TEST_CASE("retrieval metrics on hand-built rankings") {
  const Tensor<float> q = angles({0});
  SUBCASE("perfect retrieval") {
    const auto r = evaluate(q, {{1, 0}}, angles({0.1, 0.5, 1.0, 1.5, 2.0}), {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}});
    CHECK(r.map == 1.0);
    CHECK(r.rank1 == 1.0);
  }
  SUBCASE("matches at ranks 1 and 3") {
    const auto r = evaluate(q, {{1, 0}}, angles({0.1, 0.2, 0.3, 0.4}), {{1, 1}, {2, 1}, {1, 2}, {3, 1}});
    CHECK(r.map == doctest::Approx((1.0 + 2.0 / 3.0) / 2).epsilon(1e-12));
    CHECK(std::abs(r.map - 0.8333) < 1e-3);
    CHECK(r.rank1 == 1.0);
  }
  SUBCASE("same identity and camera is excluded") {
    const auto r = evaluate(q, {{1, 0}}, angles({0.0, 0.2, 0.4}), {{1, 0}, {2, 1}, {1, 1}});
    CHECK(r.map == doctest::Approx(0.5));
    CHECK(r.rank1 == 0.0);
    CHECK(r.rank5 == 1.0);
  }
  SUBCASE("queries without valid matches are counted, not scored") {
    const auto r = evaluate(angles({0, 1}), {{1, 0}, {7, 0}}, angles({0.1, 0.2}), {{1, 1}, {7, 0}});
    CHECK(r.excluded_queries == 1);
    CHECK(r.query_ap.size() == 1);
    CHECK(r.map == 1.0);
  }
  SUBCASE("ties rank by gallery index") {
    const auto first = evaluate(q, {{1, 0}}, angles({0.3, 0.3}), {{1, 1}, {2, 1}});
    const auto second = evaluate(q, {{1, 0}}, angles({0.3, 0.3}), {{2, 1}, {1, 1}});
    CHECK(first.map == 1.0);
    CHECK(second.map == 0.5);
  }
  CHECK_THROWS_AS(evaluate(q, {{1, 0}, {2, 0}}, angles({0}), {{1, 1}}), Error);
}

TEST_CASE("evaluate equals the brute-force oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nq = random_size(rng, 1, 30), ng = random_size(rng, 1, 100), ids = random_size(rng, 1, 10);
    const std::size_t dim = random_size(rng, 2, 6);
    auto feats = [&](std::size_t n) {
      auto t = l2_normalize_rows(testing::random_tensor<float>({n, dim}, rng));
      // Coarse quantization on half the trials creates exact ties.
      if (trial % 2) {
        for (auto& v : t.values()) v = std::round(v * 2.0f) / 2.0f;
      }
      return t;
    };
    auto meta = [&](std::size_t n) {
      std::vector<ImageMeta> m(n);
      for (auto& x : m) x = {static_cast<int>(random_size(rng, 0, ids - 1)), static_cast<int>(random_size(rng, 0, 3))};
      return m;
    };
    const auto qf = feats(nq), gf = feats(ng);
    const auto qm = meta(nq), gm = meta(ng);
    const auto got = evaluate(qf, qm, gf, gm);
    const auto want = reference::evaluate(rows(qf), qm, rows(gf), gm);
    CHECK(got.map == want.map);
    CHECK(got.rank1 == want.rank1);
    CHECK(got.rank5 == want.rank5);
    CHECK(got.rank10 == want.rank10);
    CHECK(got.query_ap == want.query_ap);
    CHECK(got.excluded_queries == want.excluded_queries);
    CHECK(got.rank1 <= got.rank5);
    CHECK(got.rank5 <= got.rank10);
    CHECK(got.map >= 0);
    CHECK(got.map <= 1);
  }
}

TEST_CASE("mAP is invariant to gallery order without ties") {
  std::mt19937_64 rng(2);
  const auto qf = l2_normalize_rows(testing::random_tensor<float>({5, 4}, rng));
  const auto gf = l2_normalize_rows(testing::random_tensor<float>({40, 4}, rng));
  std::vector<ImageMeta> qm(5), gm(40);
  for (std::size_t i = 0; i < 5; ++i) qm[i] = {static_cast<int>(i), 0};
  for (std::size_t i = 0; i < 40; ++i) gm[i] = {static_cast<int>(i % 5), 1 + static_cast<int>(i % 3)};
  std::vector<std::size_t> perm(40);
  for (std::size_t i = 0; i < 40; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<ImageMeta> pm;
  for (std::size_t i : perm) pm.push_back(gm[i]);
  CHECK(evaluate(qf, qm, index_rows(gf, perm), pm).map == doctest::Approx(evaluate(qf, qm, gf, gm).map));
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dcdfa_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST_CASE("metrics csv") {
  const fs::path dir = scratch("metrics");
  MetricsReport r;
  r.map = 0.786;
  r.rank1 = 0.9;
  r.rank5 = 0.95;
  r.rank10 = 1.0;
  r.scheme = "SBase";
  r.seed = 3;
  write_metrics(r, (dir / "m.csv").string());
  write_metrics(r, (dir / "m.csv").string());
  const auto l = lines(dir / "m.csv");
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "scheme,seed,mAP,R1,R5,R10,seconds");
  CHECK(l[1] == "SBase,3,78.60,90.00,95.00,100.00,0.000");
  CHECK(l[2] == l[1]);
  fs::remove_all(dir);
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dcdfa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kTiny{"-s", "n_ids_source=8", "-s", "n_ids_target=8", "-s", "imgs_per_id=8",
                                     "-s", "n_eval_ids=4",   "-s", "pretrain_epochs=10", "-s", "rounds=1",
                                     "-s", "finetune_epochs=1", "-s", "rho=0.05"};

std::vector<std::string> with_tiny(std::vector<std::string> args) {
  args.insert(args.end(), kTiny.begin(), kTiny.end());
  return args;
}

TEST_CASE("cli usage errors") {
  CHECK(cli({}).code != 0);
  CHECK(cli({"frobnicate"}).code != 0);
  CHECK(cli({"adapt", "--no-such-flag"}).code != 0);
  CHECK(cli({"eval"}).code != 0);  // --checkpoint is required
  const auto bad = cli({"adapt", "-s", "bogus=1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bogus") != std::string::npos);
}

TEST_CASE("cli checks") {
  const auto self = cli({"selftest"});
  CHECK(self.code == 0);
  CHECK(self.out.find("PASS dbscan") != std::string::npos);
  const auto grad = cli({"gradcheck", "--configs", "2"});
  CHECK(grad.code == 0);
  CHECK(grad.out.find("L_CID") != std::string::npos);
}

TEST_CASE("cli pipeline round trip") {
  const fs::path dir = scratch("cli");
  const auto gen = cli(with_tiny({"gen-data", "-o", (dir / "data").string()}));
  CHECK(gen.code == 0);
  CHECK(fs::exists(dir / "data" / "source_train.manifest"));

  const auto pre = cli(with_tiny({"pretrain", "-o", (dir / "pre").string()}));
  REQUIRE(pre.code == 0);
  CHECK(fs::exists(dir / "pre" / "pretrain.index"));

  const auto adapt = cli(with_tiny({"adapt", "--from", (dir / "pre" / "pretrain").string(), "-o",
                                    (dir / "run").string()}));
  REQUIRE(adapt.code == 0);
  CHECK(adapt.out.find("round 1:") != std::string::npos);

  const std::string ckpt = (dir / "run" / "checkpoint").string();
  const std::string csv = (dir / "eval.csv").string();
  CHECK(cli(with_tiny({"eval", "--checkpoint", ckpt, "--features", "full", "--metrics", csv})).code == 0);
  CHECK(cli(with_tiny({"eval", "--checkpoint", ckpt, "--features", "b_only", "--metrics", csv})).code == 0);
  const auto l = lines(csv);
  REQUIRE(l.size() == 3);
  CHECK(l[1].rfind("SBase+DCDFA,", 0) == 0);
  CHECK(l[2].rfind("SBase+DCDFA-b-inference,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli ablation writes one row per scheme and seed") {
  const fs::path dir = scratch("ablate");
  const auto r = cli(with_tiny({"ablate", "--table", "3", "--seeds", "3", "-o", dir.string()}));
  REQUIRE(r.code == 0);
  const auto l = lines(dir / "summary.csv");
  CHECK(l.size() == 1 + 5 * 3);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dcdfa
