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

#ifndef DCDFA_CHECKPOINT_HPP_
#define DCDFA_CHECKPOINT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dcdfa/optim.hpp"

// Checkpoint layout: "<stem>.index" is text,
//
//   DCDFA-CKPT-1
//   <name> <ndim> <dim0> ... <dimN-1> <byte offset>
//   ...
//
// and "<stem>.bin" is every tensor's values back to back as little-endian
// IEEE-754 float32, at the listed offsets.

namespace dcdfa {

inline constexpr const char* kCheckpointMagic = "DCDFA-CKPT-1";

void save_checkpoint(const std::string& stem, const ParameterList<float>& tensors);
ParameterList<float> load_checkpoint(const std::string& stem);

/// Little-endian float32 helpers shared with the dataset container.
void write_f32_le(std::ostream& os, const float* values, std::size_t n);
void read_f32_le(std::istream& is, float* values, std::size_t n);

}  // namespace dcdfa

#endif  // DCDFA_CHECKPOINT_HPP_
