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

#ifndef DCDFA_SYNTH_DATA_HPP_
#define DCDFA_SYNTH_DATA_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dcdfa/tensor.hpp"

// Two-domain synthetic person-retrieval data. A person is a block figure
// (head, torso, legs) whose colors and proportions are the identity; the
// domain applies a global photometric transform and its own backgrounds.

namespace dcdfa {

inline constexpr std::size_t kImageChannels = 3;
inline constexpr std::size_t kImageHeight = 32;
inline constexpr std::size_t kImageWidth = 16;
inline constexpr const char* kDatasetMagic = "DCDFA-DS-1";

enum class Domain : int { kSource = 0, kTarget = 1 };

struct Rgb {
  float r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Domain-transferable attributes of one person.
struct IdentityLatent {
  int id = 0;
  Rgb shirt, pants, skin, hair;
  float height_ratio = 0.85f;  // figure height / image height
  float width_ratio = 0.5f;    // torso width / image width
  float torso_ratio = 0.45f;   // torso share of the body below the head
  bool operator==(const IdentityLatent&) const = default;
};

struct DomainGap {
  float hue_shift = 0;         // radians of rotation around the gray axis
  float brightness_scale = 1;  // multiplicative
  float contrast_scale = 1;    // around mid-gray
  float blur_radius = 0;       // gaussian sigma in pixels, 0 = off
  float noise_sigma = 0;       // additive pixel noise, both domains
  float camera_jitter = 0;     // per-camera color-cast magnitude, both domains
  float saturation_scale = 1;  // target colors blended toward their luminance
  float target_camera_jitter = 0;  // extra per-camera color cast, target only
  float illumination_jitter = 0;   // per-image brightness spread, both domains
  std::vector<Rgb> source_palette;
  std::vector<Rgb> target_palette;

  /// The calibrated default gap.
  static DomainGap standard();
  /// Interpolates the target-side transform toward the source rendering;
  /// strength 0 makes both domains render identically.
  DomainGap scaled(float strength) const;
};

struct Sample {
  Tensor<float> image;  // [3, 32, 16], values in [0, 1]
  int identity = 0;
  Domain domain = Domain::kSource;
  int camera = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  DomainGap gap;

  std::size_t size() const { return samples.size(); }
  std::map<int, std::size_t> identity_counts() const;
};

struct EvalSplit {
  std::vector<Sample> query;
  std::vector<Sample> gallery;
};

struct GenerateConfig {
  int n_ids_source = 32;
  int n_ids_target = 32;
  int imgs_per_id = 16;
  int n_cameras = 4;
  /// Identities in each held-out evaluation split.
  int n_eval_ids = 32;
  DomainGap gap = DomainGap::standard();
  std::uint64_t seed = 1;
};

/// Everything one experiment needs. Identity labels are globally unique:
/// source train, source eval, target train, target eval occupy disjoint ranges.
struct SyntheticData {
  Dataset source;
  Dataset target;       // labels kept for diagnostics only
  EvalSplit target_eval;
  EvalSplit source_eval;
};

/// Deterministic function of (seed, id).
IdentityLatent make_identity(int id, std::uint64_t seed);

Sample render(const IdentityLatent& latent, Domain domain, int camera, const DomainGap& gap,
              std::mt19937_64& rng);

/// Photometric domain transform applied in place to a [3, H, W] image.
void apply_domain_transform(std::vector<float>& image, const DomainGap& gap);

SyntheticData generate(const GenerateConfig& config);

/// Renders imgs_per_id images for each id in [first_id, first_id + n_ids);
/// image k of an identity is seen by camera k % n_cameras. The per-sample
/// streams depend only on (seed, tag, position), so two calls that differ
/// only in domain see identical pose and noise draws.
std::vector<Sample> render_identity_range(int first_id, int n_ids, int imgs_per_id, int n_cameras,
                                          Domain domain, const DomainGap& gap, std::uint64_t seed,
                                          std::uint64_t tag);

/// First image of each (identity, camera) becomes a query, the rest gallery.
EvalSplit make_eval_split(std::vector<Sample> samples, int n_cameras);

/// Per-sample RNG stream derived from (seed, stream tag, index).
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

/// Stacks images into [N, 3, H, W].
Tensor<float> stack_images(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx);
Tensor<float> stack_images(const std::vector<Sample>& samples);

/// Manifest "<stem>.manifest" plus float32 blob "<stem>.bin".
void save_dataset(const std::string& stem, const std::vector<Sample>& samples);
std::vector<Sample> load_dataset(const std::string& stem);

}  // namespace dcdfa

#endif  // DCDFA_SYNTH_DATA_HPP_
