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

#include "dcdfa/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dcdfa/checkpoint.hpp"

namespace dcdfa {
namespace {

constexpr std::uint64_t kLatentTag = 0x1D;
constexpr std::uint64_t kCameraTag = 0xCA;
constexpr std::uint64_t kTargetCameraTag = 0xCB;

Rgb hsv_to_rgb(float h, float s, float v) {
  const float c = v * s;
  const float hp = std::fmod(h, 1.0f) * 6.0f;
  const float x = c * (1.0f - std::abs(std::fmod(hp, 2.0f) - 1.0f));
  float r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const float m = v - c;
  return {r + m, g + m, b + m};
}

Rgb lerp(const Rgb& a, const Rgb& b, float t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

/// Fixed per-camera channel gains, shared by both domains.
Rgb camera_gain(int camera, float jitter, std::uint64_t tag = kCameraTag) {
  std::seed_seq seq{tag, static_cast<std::uint64_t>(camera)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  return {1.0f + jitter * u(rng), 1.0f + jitter * u(rng), 1.0f + jitter * u(rng)};
}

void gaussian_blur(std::vector<float>& img, std::size_t h, std::size_t w, float sigma) {
  const int radius = static_cast<int>(std::ceil(2.0f * sigma));
  std::vector<float> k(2 * radius + 1);
  float total = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5f * static_cast<float>(i * i) / (sigma * sigma));
    total += k[i + radius];
  }
  for (auto& v : k) v /= total;
  std::vector<float> tmp(h * w);
  for (std::size_t c = 0; c < kImageChannels; ++c) {
    float* plane = img.data() + c * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const long xx = std::clamp<long>(static_cast<long>(x) + i, 0, static_cast<long>(w) - 1);
          acc += k[i + radius] * plane[y * w + xx];
        }
        tmp[y * w + x] = acc;
      }
    }
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const long yy = std::clamp<long>(static_cast<long>(y) + i, 0, static_cast<long>(h) - 1);
          acc += k[i + radius] * tmp[yy * w + x];
        }
        plane[y * w + x] = acc;
      }
    }
  }
}

std::vector<Sample> render_identities(int first_id, int n_ids, int imgs_per_id, int n_cameras,
                                      Domain domain, const DomainGap& gap, std::uint64_t seed,
                                      std::uint64_t tag) {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n_ids * imgs_per_id));
  std::uint64_t index = 0;
  for (int id = first_id; id < first_id + n_ids; ++id) {
    const IdentityLatent latent = make_identity(id, seed);
    for (int k = 0; k < imgs_per_id; ++k) {
      auto rng = sample_rng(seed, tag, index++);
      out.push_back(render(latent, domain, k % n_cameras, gap, rng));
    }
  }
  return out;
}

EvalSplit split_query_gallery(std::vector<Sample> samples, int n_cameras) {
  EvalSplit split;
  std::map<int, std::vector<bool>> seen;
  for (auto& s : samples) {
    auto& cams = seen[s.identity];
    cams.resize(static_cast<std::size_t>(n_cameras), false);
    if (!cams[static_cast<std::size_t>(s.camera)]) {
      cams[static_cast<std::size_t>(s.camera)] = true;
      split.query.push_back(std::move(s));
    } else {
      split.gallery.push_back(std::move(s));
    }
  }
  return split;
}

}  // namespace

DomainGap DomainGap::standard() {
  DomainGap g;
  g.hue_shift = 2.0f;
  g.brightness_scale = 0.7f;
  g.contrast_scale = 0.75f;
  g.blur_radius = 0.7f;
  g.noise_sigma = 0.03f;
  g.camera_jitter = 0.04f;
  g.target_camera_jitter = 0.1f;
  g.source_palette = {{0.55f, 0.60f, 0.50f}, {0.65f, 0.62f, 0.55f}, {0.45f, 0.52f, 0.45f}};
  g.target_palette = {{0.30f, 0.35f, 0.55f}, {0.40f, 0.40f, 0.60f}, {0.25f, 0.30f, 0.45f}};
  return g;
}

DomainGap DomainGap::scaled(float strength) const {
  DomainGap g = *this;
  g.hue_shift = hue_shift * strength;
  g.brightness_scale = 1.0f + (brightness_scale - 1.0f) * strength;
  g.contrast_scale = 1.0f + (contrast_scale - 1.0f) * strength;
  g.blur_radius = blur_radius * strength;
  g.saturation_scale = 1.0f + (saturation_scale - 1.0f) * strength;
  g.target_camera_jitter = target_camera_jitter * strength;
  g.target_palette.clear();
  for (std::size_t i = 0; i < source_palette.size(); ++i) {
    const Rgb& t = target_palette.empty() ? source_palette[i]
                                          : target_palette[i % target_palette.size()];
    g.target_palette.push_back(strength == 0.0f ? source_palette[i] : lerp(source_palette[i], t, strength));
  }
  return g;
}

std::map<int, std::size_t> Dataset::identity_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& s : samples) counts[s.identity]++;
  return counts;
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{seed & 0xffffffffu, seed >> 32, tag, index & 0xffffffffu, index >> 32};
  return std::mt19937_64(seq);
}

IdentityLatent make_identity(int id, std::uint64_t seed) {
  if (id < 0) throw Error("make_identity: negative id");
  auto rng = sample_rng(seed, kLatentTag, static_cast<std::uint64_t>(id));
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  IdentityLatent z;
  z.id = id;
  z.shirt = hsv_to_rgb(u(rng), 0.45f + 0.55f * u(rng), 0.35f + 0.65f * u(rng));
  z.pants = hsv_to_rgb(u(rng), 0.3f + 0.7f * u(rng), 0.2f + 0.7f * u(rng));
  const float tone = 0.35f + 0.55f * u(rng);
  z.skin = {tone, tone * 0.78f, tone * 0.62f};
  z.hair = hsv_to_rgb(0.05f + 0.08f * u(rng), 0.3f + 0.5f * u(rng), 0.05f + 0.6f * u(rng));
  z.height_ratio = 0.72f + 0.22f * u(rng);
  z.width_ratio = 0.38f + 0.30f * u(rng);
  z.torso_ratio = 0.36f + 0.22f * u(rng);
  return z;
}

void apply_domain_transform(std::vector<float>& image, const DomainGap& gap) {
  const std::size_t plane = kImageHeight * kImageWidth;
  float* r = image.data();
  float* g = r + plane;
  float* b = g + plane;
  if (gap.hue_shift != 0.0f) {
    const float c = std::cos(gap.hue_shift), s = std::sin(gap.hue_shift);
    const float k = (1.0f - c) / 3.0f, q = std::sqrt(1.0f / 3.0f) * s;
    const float m[3][3] = {{c + k, k - q, k + q}, {k + q, c + k, k - q}, {k - q, k + q, c + k}};
    for (std::size_t p = 0; p < plane; ++p) {
      const float x0 = r[p], x1 = g[p], x2 = b[p];
      r[p] = m[0][0] * x0 + m[0][1] * x1 + m[0][2] * x2;
      g[p] = m[1][0] * x0 + m[1][1] * x1 + m[1][2] * x2;
      b[p] = m[2][0] * x0 + m[2][1] * x1 + m[2][2] * x2;
    }
  }
  if (gap.saturation_scale != 1.0f) {
    for (std::size_t p = 0; p < plane; ++p) {
      const float l = 0.299f * r[p] + 0.587f * g[p] + 0.114f * b[p];
      r[p] = l + gap.saturation_scale * (r[p] - l);
      g[p] = l + gap.saturation_scale * (g[p] - l);
      b[p] = l + gap.saturation_scale * (b[p] - l);
    }
  }
  if (gap.contrast_scale != 1.0f) {
    for (auto& v : image) v = (v - 0.5f) * gap.contrast_scale + 0.5f;
  }
  if (gap.brightness_scale != 1.0f) {
    for (auto& v : image) v *= gap.brightness_scale;
  }
  if (gap.blur_radius > 0.0f) gaussian_blur(image, kImageHeight, kImageWidth, gap.blur_radius);
}

Sample render(const IdentityLatent& z, Domain domain, int camera, const DomainGap& gap,
              std::mt19937_64& rng) {
  constexpr std::size_t H = kImageHeight, W = kImageWidth, plane = H * W;
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::normal_distribution<float> normal(0.0f, 1.0f);

  const auto& palette = domain == Domain::kSource ? gap.source_palette : gap.target_palette;
  if (palette.empty()) throw Error("render: empty background palette");
  const Rgb bg = palette[static_cast<std::size_t>(u(rng) * static_cast<float>(palette.size())) %
                         palette.size()];
  const float slope = 0.2f * (u(rng) - 0.5f);

  std::vector<float> img(kImageChannels * plane);
  auto put = [&](std::size_t y, std::size_t x, const Rgb& c) {
    img[y * W + x] = c.r;
    img[plane + y * W + x] = c.g;
    img[2 * plane + y * W + x] = c.b;
  };
  for (std::size_t y = 0; y < H; ++y) {
    const float shade = 1.0f + slope * (static_cast<float>(y) / H - 0.5f);
    for (std::size_t x = 0; x < W; ++x) put(y, x, {bg.r * shade, bg.g * shade, bg.b * shade});
  }

  // Pose jitter: scale, vertical and horizontal shift.
  const float scale = 0.94f + 0.12f * u(rng);
  const float dy = std::floor(3.0f * u(rng)) - 1.0f;
  const float dx = std::floor(3.0f * u(rng)) - 1.0f;
  const float fig_h = z.height_ratio * H * scale;
  const float top = (H - fig_h) * 0.5f + dy;
  const float head_h = 0.17f * fig_h;
  const float body_h = fig_h - head_h;
  const float torso_h = z.torso_ratio * body_h;
  const float torso_w = z.width_ratio * W * scale;
  const float cx = W * 0.5f + dx;
  const float head_w = 0.6f * torso_w;
  const float leg_w = 0.42f * torso_w;

  for (std::size_t y = 0; y < H; ++y) {
    const float py = static_cast<float>(y) + 0.5f;
    for (std::size_t x = 0; x < W; ++x) {
      const float px = static_cast<float>(x) + 0.5f;
      const float off = std::abs(px - cx);
      if (py >= top && py < top + head_h && off < head_w * 0.5f) {
        put(y, x, py < top + 0.35f * head_h ? z.hair : z.skin);
      } else if (py >= top + head_h && py < top + head_h + torso_h && off < torso_w * 0.5f) {
        put(y, x, z.shirt);
      } else if (py >= top + head_h + torso_h && py < top + fig_h && off < leg_w &&
                 off > 0.12f * torso_w) {
        put(y, x, z.pants);
      }
    }
  }

  Rgb gain = camera_gain(camera, gap.camera_jitter);
  if (domain == Domain::kTarget && gap.target_camera_jitter > 0.0f) {
    const Rgb extra = camera_gain(camera, gap.target_camera_jitter, kTargetCameraTag);
    gain = {gain.r * extra.r, gain.g * extra.g, gain.b * extra.b};
  }
  // Drawn unconditionally so both domains consume the same stream.
  const float light = 1.0f + gap.illumination_jitter * (2.0f * u(rng) - 1.0f);
  for (std::size_t p = 0; p < plane; ++p) {
    img[p] *= gain.r * light;
    img[plane + p] *= gain.g * light;
    img[2 * plane + p] *= gain.b * light;
  }
  if (domain == Domain::kTarget) apply_domain_transform(img, gap);
  if (gap.noise_sigma > 0.0f) {
    for (auto& v : img) v += gap.noise_sigma * normal(rng);
  }
  for (auto& v : img) v = std::clamp(v, 0.0f, 1.0f);

  Sample s;
  s.image = Tensor<float>(Shape{kImageChannels, H, W}, std::move(img));
  s.identity = z.id;
  s.domain = domain;
  s.camera = camera;
  return s;
}

SyntheticData generate(const GenerateConfig& c) {
  if (c.n_ids_source < 2 || c.n_ids_target < 2 || c.n_eval_ids < 2) {
    throw Error("generate: each split needs at least 2 identities");
  }
  if (c.n_cameras < 2) throw Error("generate: at least 2 cameras are required for evaluation");
  if (c.imgs_per_id < c.n_cameras + 1) {
    throw Error("generate: imgs_per_id must exceed n_cameras so every identity has gallery images");
  }
  const int src_first = 0;
  const int src_eval_first = src_first + c.n_ids_source;
  const int tgt_first = src_eval_first + c.n_eval_ids;
  const int tgt_eval_first = tgt_first + c.n_ids_target;

  SyntheticData d;
  d.source.gap = c.gap;
  d.target.gap = c.gap;
  d.source.samples = render_identities(src_first, c.n_ids_source, c.imgs_per_id, c.n_cameras,
                                       Domain::kSource, c.gap, c.seed, 1);
  d.target.samples = render_identities(tgt_first, c.n_ids_target, c.imgs_per_id, c.n_cameras,
                                       Domain::kTarget, c.gap, c.seed, 2);
  d.source_eval = split_query_gallery(
      render_identities(src_eval_first, c.n_eval_ids, c.imgs_per_id, c.n_cameras, Domain::kSource,
                        c.gap, c.seed, 3),
      c.n_cameras);
  d.target_eval = split_query_gallery(
      render_identities(tgt_eval_first, c.n_eval_ids, c.imgs_per_id, c.n_cameras, Domain::kTarget,
                        c.gap, c.seed, 4),
      c.n_cameras);
  return d;
}

std::vector<Sample> render_identity_range(int first_id, int n_ids, int imgs_per_id, int n_cameras,
                                          Domain domain, const DomainGap& gap, std::uint64_t seed,
                                          std::uint64_t tag) {
  return render_identities(first_id, n_ids, imgs_per_id, n_cameras, domain, gap, seed, tag);
}

EvalSplit make_eval_split(std::vector<Sample> samples, int n_cameras) {
  return split_query_gallery(std::move(samples), n_cameras);
}

Tensor<float> stack_images(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx) {
  const std::size_t per = kImageChannels * kImageHeight * kImageWidth;
  Tensor<float> out(Shape{idx.size(), kImageChannels, kImageHeight, kImageWidth});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& img = samples.at(idx[i]).image;
    std::copy(img.data().begin(), img.data().end(), out.data().begin() + static_cast<long>(i * per));
  }
  return out;
}

Tensor<float> stack_images(const std::vector<Sample>& samples) {
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return stack_images(samples, idx);
}

void save_dataset(const std::string& stem, const std::vector<Sample>& samples) {
  std::ofstream manifest(stem + ".manifest");
  std::ofstream blob(stem + ".bin", std::ios::binary);
  if (!manifest || !blob) throw Error("save_dataset: cannot open " + stem + ".{manifest,bin}");
  manifest << kDatasetMagic << '\n';
  manifest << "shape " << kImageChannels << ' ' << kImageHeight << ' ' << kImageWidth << '\n';
  manifest << "count " << samples.size() << '\n';
  const std::size_t per = kImageChannels * kImageHeight * kImageWidth;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.image.numel() != per) throw Error("save_dataset: sample " + std::to_string(i) + " has wrong size");
    manifest << i << ' ' << s.identity << ' ' << static_cast<int>(s.domain) << ' ' << s.camera << ' '
             << i * per * 4 << '\n';
    write_f32_le(blob, s.image.data().data(), per);
  }
  if (!manifest || !blob) throw Error("save_dataset: write failed for " + stem);
}

std::vector<Sample> load_dataset(const std::string& stem) {
  std::ifstream manifest(stem + ".manifest");
  std::ifstream blob(stem + ".bin", std::ios::binary);
  if (!manifest || !blob) throw Error("load_dataset: cannot open " + stem + ".{manifest,bin}");
  std::string line, word;
  std::getline(manifest, line);
  if (line != kDatasetMagic) throw Error("load_dataset: bad magic in " + stem + ".manifest");
  std::size_t c = 0, h = 0, w = 0, count = 0;
  manifest >> word >> c >> h >> w;
  if (word != "shape" || c != kImageChannels || h != kImageHeight || w != kImageWidth) {
    throw Error("load_dataset: unsupported image shape in " + stem);
  }
  manifest >> word >> count;
  if (word != "count") throw Error("load_dataset: missing count in " + stem);
  const std::size_t per = c * h * w;
  std::vector<Sample> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t index = 0;
    int domain = 0;
    std::uint64_t offset = 0;
    manifest >> index >> out[i].identity >> domain >> out[i].camera >> offset;
    if (!manifest || index != i) throw Error("load_dataset: malformed record " + std::to_string(i));
    out[i].domain = static_cast<Domain>(domain);
    out[i].image = Tensor<float>(Shape{c, h, w});
    blob.seekg(static_cast<std::streamoff>(offset));
    read_f32_le(blob, out[i].image.data().data(), per);
  }
  return out;
}

}  // namespace dcdfa
