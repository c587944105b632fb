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

#include "dcdfa/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dcdfa/gradcheck.hpp"
#include "dcdfa/losses.hpp"
#include "dcdfa/model.hpp"
#include "dcdfa/reference.hpp"

namespace dcdfa {
namespace {

using D = Tensor<double>;

D normal(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  D t(std::move(shape));
  for (auto& v : t.data()) v = n(rng);
  return t;
}

D uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  D t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Smooth scalar read-out of a tensor through a fixed random projection.
D project(const D& x, const D& weights) { return sum(x * weights); }

struct Tracker {
  CheckResult result;
  explicit Tracker(std::string name) { result.name = std::move(name); }
  void add(double err) {
    result.value = std::max(result.value, err);
    result.trials++;
  }
};

constexpr GradCheckOptions kOpts{1e-5, 0, 0};

double check_cid(std::mt19937_64& rng) {
  const std::size_t n = pick(rng, 1, 4), c = pick(rng, 2, 8);
  RecomposedSet<double> set{normal({n, c}, rng), normal({n, c}, rng), normal({n, c}, rng), normal({n, c}, rng)};
  D tau = uniform({1}, rng, 0.3, 2.0);
  return grad_check([&] { return cid_loss(set, tau); }, {set.f_src, set.f_tgt, set.r_src, set.r_tgt, tau}, kOpts);
}

double check_domain(std::mt19937_64& rng, std::uint64_t mask_seed) {
  const std::size_t n = pick(rng, 1, 4);
  std::array<D, 4> p;
  for (auto& t : p) t = uniform({n}, rng, 0.05, 0.95);
  const double direct = grad_check([&] { return domain_loss(p[0], p[1], p[2], p[3]); }, {p[0], p[1], p[2], p[3]}, kOpts);

  // Through the classifier, with dropout masks replayed from a fixed seed.
  ModelConfig mc;
  mc.widths = {4, 8, 16};
  mc.reduction = 4;
  ModelParams<double> model = cast_model<double>(init_model(mc, 2, 0, mask_seed));
  // Zero biases put relu inputs exactly on the kink whenever dropout or a dead
  // unit zeroes a whole layer; generic biases keep the check away from it.
  for (auto& b : model.domain.bias) b = normal(b.shape(), rng, 0.1);
  std::array<D, 4> feat;
  for (auto& t : feat) t = uniform({n, 16}, rng, 0.0, 1.0);
  auto f = [&] {
    std::mt19937_64 drop(mask_seed);
    std::array<D, 4> q;
    for (std::size_t i = 0; i < 4; ++i) q[i] = classify_domain(feat[i], model.domain, 0.1, true, &drop);
    return domain_loss(q[0], q[1], q[2], q[3]);
  };
  std::vector<D> params(feat.begin(), feat.end());
  for (std::size_t i = 0; i < 3; ++i) {
    params.push_back(model.domain.weight[i]);
    params.push_back(model.domain.bias[i]);
  }
  return std::max(direct, grad_check(f, params, kOpts));
}

double check_triplet(std::mt19937_64& rng) {
  const std::size_t p = pick(rng, 2, 3), k = pick(rng, 2, 3), c = pick(rng, 3, 8);
  std::vector<int> labels;
  for (std::size_t i = 0; i < p; ++i) labels.insert(labels.end(), k, static_cast<int>(i));
  std::shuffle(labels.begin(), labels.end(), rng);
  D x = normal({p * k, c}, rng);
  const double margin = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
  return grad_check([&] { return triplet_loss(x, labels, margin); }, {x}, kOpts);
}

double check_identity(std::mt19937_64& rng) {
  const std::size_t b = pick(rng, 1, 6), k = pick(rng, 2, 6), c = pick(rng, 2, 6);
  std::vector<int> labels(b);
  for (auto& l : labels) l = static_cast<int>(pick(rng, 0, k - 1));
  D feat = normal({b, c}, rng);
  IdentityHead<double> head{normal({k, c}, rng, 0.5), normal({k}, rng, 0.1)};
  return grad_check([&] { return identity_ce_loss(classify_identity(feat, head), labels); },
                    {feat, head.weight, head.bias}, kOpts);
}

double check_memory(std::mt19937_64& rng) {
  const std::size_t q = pick(rng, 1, 4), m = pick(rng, 3, 10), c = pick(rng, 2, 6);
  D query = normal({q, c}, rng);
  D bank = normal({m, c}, rng);
  std::vector<int> bank_labels(m);
  for (auto& l : bank_labels) l = static_cast<int>(pick(rng, 0, 2));
  std::vector<MemoryQuery> info(q);
  for (auto& qi : info) qi = {bank_labels[pick(rng, 0, m - 1)], -1};
  info[0].self_entry = static_cast<long>(pick(rng, 0, m - 1));
  const double temp = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
  const double margin = 0.25;

  // Masks and circle weights fixed at the starting point, as in training.
  std::vector<std::vector<bool>> pos(q, std::vector<bool>(m)), inc(q, std::vector<bool>(m, true));
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      pos[i][j] = bank_labels[j] == info[i].label && static_cast<long>(j) != info[i].self_entry;
      inc[i][j] = static_cast<long>(j) != info[i].self_entry;
    }
  }
  bool any = true;
  for (const auto& row : pos) any = any && std::find(row.begin(), row.end(), true) != row.end();
  D weights({q, m}, 1.0);
  {
    NoGradGuard guard;
    const D s = matmul(l2_normalize_rows(query), transpose(l2_normalize_rows(bank)));
    for (std::size_t i = 0; i < q * m; ++i) {
      weights[i] = pos[i / m][i % m] ? std::max(0.0, 1 + margin - s[i]) : std::max(0.0, s[i] + margin);
    }
  }
  double err = 0;
  if (any) {
    err = grad_check([&] {
      const D s = matmul(l2_normalize_rows(query), transpose(l2_normalize_rows(bank)));
      return weighted_contrastive_loss(s, weights, pos, inc, temp);
    }, {query, bank}, kOpts);
  }
  const D unit_bank = [&] {
    NoGradGuard guard;
    return l2_normalize_rows(bank);
  }();
  MemoryLossOptions opts{temp, margin, false};
  err = std::max(err, grad_check([&] { return memory_contrastive_loss(query, info, unit_bank, bank_labels, opts); },
                                 {query}, kOpts));
  return err;
}

double check_attention(std::mt19937_64& rng) {
  const std::size_t b = 2 * pick(rng, 1, 2), r = 4, c = r * pick(rng, 1, 3), h = pick(rng, 2, 4), w = pick(rng, 1, 3);
  D fmap = uniform({b, c, h, w}, rng, 0.0, 1.0);
  AttentionParams<double> att{normal({c / r, c}, rng), normal({c, c / r}, rng)};
  const D u1 = normal({b / 2, c}, rng), u2 = normal({b / 2, c}, rng), u3 = normal({b, c}, rng), u4 = normal({b, c}, rng);
  std::vector<std::size_t> src(b / 2), tgt(b / 2);
  for (std::size_t i = 0; i < b / 2; ++i) {
    src[i] = i;
    tgt[i] = b - 1 - i;
  }
  auto f = [&] {
    const FeatureBundle<double> all = attend_decompose(fmap, att);
    const Recomposition<double> rec = recompose(all.select(src), all.select(tgt));
    return project(rec.r_src, u1) + project(rec.r_tgt, u2) + project(all.b, u3) + project(all.e, u4);
  };
  return grad_check(f, {fmap, att.w0, att.w1}, kOpts);
}

double check_encoder(std::mt19937_64& rng, std::uint64_t model_seed) {
  ModelConfig mc;
  mc.widths = {3, 4, 8};
  mc.reduction = 4;
  ModelParams<double> model = cast_model<double>(init_model(mc, 2, 0, model_seed));
  for (auto& b : model.encoder.bias) b = normal(b.shape(), rng, 0.1);
  D images = uniform({2, 3, 8, 4}, rng, 0.0, 1.0);
  const D u = normal({2, 8}, rng);
  auto f = [&] { return project(pool(PoolKind::kSpatialAvg, encode(model.encoder, images)), u); };
  std::vector<D> params{images};
  for (std::size_t i = 0; i < 3; ++i) {
    params.push_back(model.encoder.weight[i]);
    params.push_back(model.encoder.bias[i]);
  }
  return grad_check(f, params, kOpts);
}

std::vector<float> random_floats(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_rel_diff(std::span<const float> got, const std::vector<double>& want) {
  double worst = 0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    worst = std::max(worst, std::abs(double(got[i]) - want[i]) / std::max(1.0, std::abs(want[i])));
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_gradient_suite(std::size_t configs, std::uint64_t seed, double tolerance) {
  std::vector<Tracker> items{Tracker("L_CID"),     Tracker("L_Domain"),   Tracker("triplet"),  Tracker("identity_ce"),
                             Tracker("L_mem"),     Tracker("attention_recomposition"), Tracker("encoder")};
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < configs; ++t) {
    items[0].add(check_cid(rng));
    items[1].add(check_domain(rng, seed + t));
    items[2].add(check_triplet(rng));
    items[3].add(check_identity(rng));
    items[4].add(check_memory(rng));
    items[5].add(check_attention(rng));
    items[6].add(check_encoder(rng, seed + t));
  }
  std::vector<CheckResult> out;
  for (auto& it : items) {
    it.result.passed = it.result.value < tolerance;
    out.push_back(it.result);
  }
  return out;
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  CheckResult mm{"matmul", true, 0, 0, ""};
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = pick(rng, 1, 40), k = pick(rng, 1, 70), n = pick(rng, 1, 40);
    const auto a = random_floats(m * k, rng), b = random_floats(k * n, rng);
    const Tensor<float> c = matmul(Tensor<float>({m, k}, a), Tensor<float>({k, n}, b));
    const auto ref = reference::matmul({a.begin(), a.end()}, {b.begin(), b.end()}, m, k, n);
    mm.value = std::max(mm.value, max_rel_diff(c.data(), ref));
    mm.trials++;
  }
  mm.passed = mm.value < 1e-5;
  out.push_back(mm);

  CheckResult cv{"conv2d", true, 0, 0, ""};
  for (int t = 0; t < 20; ++t) {
    const std::size_t b = pick(rng, 1, 3), c = pick(rng, 1, 4), h = pick(rng, 3, 12), w = pick(rng, 3, 10);
    const std::size_t o = pick(rng, 1, 5), kk = pick(rng, 1, 3), stride = pick(rng, 1, 2), pad = pick(rng, 0, 1);
    const auto x = random_floats(b * c * h * w, rng), k = random_floats(o * c * kk * kk, rng);
    const auto bias = random_floats(o, rng);
    const Tensor<float> y = conv2d(Tensor<float>({b, c, h, w}, x), Tensor<float>({o, c, kk, kk}, k),
                                   Tensor<float>({o}, bias), stride, pad);
    const auto ref = reference::conv2d({x.begin(), x.end()}, {k.begin(), k.end()}, {bias.begin(), bias.end()}, b, c,
                                       h, w, o, kk, kk, stride, pad);
    cv.value = std::max(cv.value, max_rel_diff(y.data(), ref));
    cv.trials++;
  }
  cv.passed = cv.value < 1e-5;
  out.push_back(cv);

  CheckResult db{"dbscan", true, 0, 0, ""};
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = pick(rng, 5, 200), dims = pick(rng, 2, 8), blobs = pick(rng, 1, 6);
    const auto centers = random_floats(blobs * dims, rng);
    std::normal_distribution<float> noise(0.0f, std::uniform_real_distribution<float>(0.05f, 0.6f)(rng));
    Tensor<float> x({n, dims});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cidx = pick(rng, 0, blobs - 1);
      for (std::size_t d = 0; d < dims; ++d) x[i * dims + d] = centers[cidx * dims + d] + noise(rng);
    }
    const ClusterConfig cfg{std::uniform_real_distribution<double>(0.02, 0.5)(rng), pick(rng, 1, 6)};
    const DistanceMatrix dist = pairwise_distance(x);
    const PseudoLabelTable got = dbscan(dist, cfg);
    if (!reference::same_partition(got.labels, reference::dbscan(dist, cfg.eps, cfg.min_pts))) {
      db.value += 1;
      if (db.detail.empty()) db.detail = "first mismatch in trial " + std::to_string(t);
    }
    db.trials++;
  }
  db.passed = db.value == 0;
  out.push_back(db);

  CheckResult ev{"evaluate", true, 0, 0, ""};
  for (int t = 0; t < 100; ++t) {
    const std::size_t nq = pick(rng, 1, 30), ng = pick(rng, 1, 100), dims = pick(rng, 2, 6);
    const int ids = static_cast<int>(pick(rng, 1, 8)), cams = static_cast<int>(pick(rng, 1, 4));
    // Coarse quantization produces exact ties, exercising the tie rule.
    const bool quantize = t % 2 == 0;
    auto make = [&](std::size_t n, std::vector<ImageMeta>& meta, std::vector<std::vector<double>>& rows) {
      std::vector<float> v = random_floats(n * dims, rng);
      for (std::size_t i = 0; i < n; ++i) {
        double norm = 0;
        for (std::size_t d = 0; d < dims; ++d) {
          if (quantize) v[i * dims + d] = std::round(v[i * dims + d]);
          norm += double(v[i * dims + d]) * v[i * dims + d];
        }
        if (norm == 0) v[i * dims] = 1, norm = 1;
        for (std::size_t d = 0; d < dims; ++d) v[i * dims + d] = static_cast<float>(v[i * dims + d] / std::sqrt(norm));
        meta.push_back({static_cast<int>(pick(rng, 0, ids - 1)), static_cast<int>(pick(rng, 0, cams - 1))});
        rows.emplace_back(v.begin() + static_cast<long>(i * dims), v.begin() + static_cast<long>((i + 1) * dims));
      }
      return Tensor<float>({n, dims}, v);
    };
    std::vector<ImageMeta> qm, gm;
    std::vector<std::vector<double>> qr, gr;
    const Tensor<float> q = make(nq, qm, qr);
    const Tensor<float> g = make(ng, gm, gr);
    const MetricsReport a = evaluate(q, qm, g, gm);
    const MetricsReport b = reference::evaluate(qr, qm, gr, gm);
    const bool same = a.map == b.map && a.rank1 == b.rank1 && a.rank5 == b.rank5 && a.rank10 == b.rank10 &&
                      a.query_ap == b.query_ap && a.excluded_queries == b.excluded_queries;
    if (!same) {
      ev.value += 1;
      if (ev.detail.empty()) ev.detail = "first mismatch in trial " + std::to_string(t);
    }
    ev.trials++;
  }
  ev.passed = ev.value == 0;
  out.push_back(ev);
  return out;
}

}  // namespace dcdfa
