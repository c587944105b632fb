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
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "dcdfa/synth_data.hpp"
#include "doctest.h"

namespace dcdfa {
namespace {

GenerateConfig small_config() {
  GenerateConfig c;
  c.n_ids_source = 4;
  c.n_ids_target = 4;
  c.imgs_per_id = 6;
  c.n_cameras = 3;
  c.n_eval_ids = 3;
  return c;
}

TEST_CASE("identity latents are a deterministic function of (seed, id)") {
  CHECK(make_identity(7, 1) == make_identity(7, 1));
  CHECK_FALSE(make_identity(7, 1) == make_identity(7, 2));
  int collisions = 0;
  for (int i = 0; i < 1000; ++i) collisions += make_identity(2 * i, 3) == make_identity(2 * i + 1, 3);
  CHECK(collisions <= 10);
}

TEST_CASE("renders are valid images") {
  const DomainGap gap = DomainGap::standard();
  for (int id = 0; id < 20; ++id) {
    auto rng = sample_rng(5, 9, static_cast<std::uint64_t>(id));
    const Sample s = render(make_identity(id, 5), id % 2 ? Domain::kTarget : Domain::kSource, id % 4, gap, rng);
    CHECK(s.image.shape() == Shape{kImageChannels, kImageHeight, kImageWidth});
    CHECK(std::all_of(s.image.values().begin(), s.image.values().end(), [](float v) { return v >= 0 && v <= 1; }));
  }
}

TEST_CASE("zero gap renders both domains identically") {
  DomainGap gap = DomainGap::standard().scaled(0.0f);
  gap.noise_sigma = 0;
  for (int id = 0; id < 10; ++id) {
    const IdentityLatent latent = make_identity(id, 4);
    auto rs = sample_rng(4, 1, static_cast<std::uint64_t>(id));
    auto rt = sample_rng(4, 1, static_cast<std::uint64_t>(id));
    const Sample s = render(latent, Domain::kSource, 1, gap, rs);
    const Sample t = render(latent, Domain::kTarget, 1, gap, rt);
    CHECK(s.image.values() == t.image.values());
  }
}

TEST_CASE("brightness scale halves the mean intensity before clipping") {
  std::vector<float> image(kImageChannels * kImageHeight * kImageWidth);
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = 0.2f + 0.6f * static_cast<float>(i % 7) / 6.0f;
  std::vector<float> dimmed = image;
  DomainGap gap;
  gap.brightness_scale = 0.5f;
  apply_domain_transform(dimmed, gap);
  double before = 0, after = 0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    before += image[i];
    after += dimmed[i];
  }
  CHECK(after == doctest::Approx(0.5 * before).epsilon(1e-5));
}

// The gap shows up in the mean color: the difference of the per-channel
// domain means must exceed five standard errors of those means.
TEST_CASE("default gap separates domain mean intensities") {
  const DomainGap gap = DomainGap::standard();
  const std::size_t renders = 500, pixels = kImageHeight * kImageWidth;
  std::array<std::vector<double>, 2> channel_means[3];
  for (std::size_t i = 0; i < renders; ++i) {
    for (int d = 0; d < 2; ++d) {
      auto rng = sample_rng(21, 30 + static_cast<std::uint64_t>(d), i);
      const Sample s = render(make_identity(static_cast<int>(i), 21), d ? Domain::kTarget : Domain::kSource,
                              static_cast<int>(i % 4), gap, rng);
      for (std::size_t c = 0; c < 3; ++c) {
        double m = 0;
        for (std::size_t p = 0; p < pixels; ++p) m += s.image[c * pixels + p];
        channel_means[c][static_cast<std::size_t>(d)].push_back(m / pixels);
      }
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto standard_error = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  for (std::size_t c = 0; c < 3; ++c) {
    const double diff = std::abs(mean(channel_means[c][0]) - mean(channel_means[c][1]));
    const double se = std::max(standard_error(channel_means[c][0]), standard_error(channel_means[c][1]));
    INFO("channel " << c << " diff " << diff << " se " << se);
    CHECK(diff > 5 * se);
  }
}

TEST_CASE("generate sizes, disjoint labels and cameras") {
  const SyntheticData d = generate(GenerateConfig{});
  CHECK(d.source.size() == 512);
  CHECK(d.target.size() == 512);
  std::set<int> src, tgt;
  for (const auto& s : d.source.samples) src.insert(s.identity);
  for (const auto& s : d.target.samples) tgt.insert(s.identity);
  for (const auto& s : d.target_eval.query) tgt.insert(s.identity);
  for (const auto& s : d.source_eval.query) src.insert(s.identity);
  for (int id : src) CHECK(tgt.count(id) == 0);
  std::map<int, std::set<int>> cams;
  for (const auto& s : d.target.samples) cams[s.identity].insert(s.camera);
  for (const auto& [id, c] : cams) CHECK(c.size() >= 2);
  for (const auto& [id, n] : d.source.identity_counts()) CHECK(n == 16);
}

TEST_CASE("generate is deterministic and seed sensitive") {
  GenerateConfig c = small_config();
  const SyntheticData a = generate(c);
  const SyntheticData b = generate(c);
  REQUIRE(a.target.size() == b.target.size());
  for (std::size_t i = 0; i < a.target.size(); ++i) {
    CHECK(a.target.samples[i].image.values() == b.target.samples[i].image.values());
  }
  c.seed = 2;
  const SyntheticData other = generate(c);
  CHECK(other.source.samples[0].image.values() != a.source.samples[0].image.values());
}

TEST_CASE("generate rejects impossible configurations") {
  GenerateConfig c = small_config();
  c.n_cameras = 1;
  CHECK_THROWS_AS(generate(c), Error);
  c = small_config();
  c.imgs_per_id = 2;
  CHECK_THROWS_AS(generate(c), Error);
}

TEST_CASE("eval split takes one query per identity and camera") {
  const SyntheticData d = generate(small_config());
  std::set<std::pair<int, int>> seen;
  for (const auto& q : d.target_eval.query) CHECK(seen.insert({q.identity, q.camera}).second);
  CHECK(d.target_eval.query.size() == 3u * 3u);
  CHECK(d.target_eval.gallery.size() == 3u * 6u - 9u);
}

TEST_CASE("dataset container round trip is bit exact") {
  const SyntheticData d = generate(small_config());
  const auto dir = std::filesystem::temp_directory_path() / "dcdfa_test_ds";
  std::filesystem::create_directories(dir);
  const std::string stem = (dir / "target").string();
  save_dataset(stem, d.target.samples);
  const auto loaded = load_dataset(stem);
  REQUIRE(loaded.size() == d.target.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].identity == d.target.samples[i].identity);
    CHECK(loaded[i].camera == d.target.samples[i].camera);
    CHECK(loaded[i].domain == d.target.samples[i].domain);
    CHECK(loaded[i].image.values() == d.target.samples[i].image.values());
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dcdfa
