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

#include "dcdfa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dcdfa {

void write_f32_le(std::ostream& os, const float* values, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = std::bit_cast<std::uint32_t>(values[i]);
    buf[4 * i + 0] = static_cast<unsigned char>(u & 0xffu);
    buf[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xffu);
    buf[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xffu);
    buf[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xffu);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_f32_le(std::istream& is, float* values, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw Error("read_f32_le: truncated blob");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(buf[4 * i]) |
                            (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                            (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                            (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    values[i] = std::bit_cast<float>(u);
  }
}

void save_checkpoint(const std::string& stem, const ParameterList<float>& tensors) {
  std::ofstream index(stem + ".index");
  std::ofstream blob(stem + ".bin", std::ios::binary);
  if (!index || !blob) throw Error("save_checkpoint: cannot open " + stem + ".{index,bin}");
  index << kCheckpointMagic << '\n';
  std::uint64_t offset = 0;
  for (const auto& p : tensors) {
    if (p.name.empty() || p.name.find_first_of(" \t\n") != std::string::npos) {
      throw Error("save_checkpoint: invalid tensor name '" + p.name + "'");
    }
    index << p.name << ' ' << p.value.ndim();
    for (auto d : p.value.shape()) index << ' ' << d;
    index << ' ' << offset << '\n';
    write_f32_le(blob, p.value.data().data(), p.value.numel());
    offset += 4 * p.value.numel();
  }
  if (!index || !blob) throw Error("save_checkpoint: write failed for " + stem);
}

ParameterList<float> load_checkpoint(const std::string& stem) {
  std::ifstream index(stem + ".index");
  std::ifstream blob(stem + ".bin", std::ios::binary);
  if (!index || !blob) throw Error("load_checkpoint: cannot open " + stem + ".{index,bin}");
  std::string line;
  std::getline(index, line);
  if (line != kCheckpointMagic) throw Error("load_checkpoint: bad magic in " + stem + ".index");
  ParameterList<float> out;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    std::size_t ndim = 0;
    ls >> name >> ndim;
    Shape shape(ndim);
    for (auto& d : shape) ls >> d;
    std::uint64_t offset = 0;
    ls >> offset;
    if (!ls) throw Error("load_checkpoint: malformed index line '" + line + "'");
    Tensor<float> t(shape);
    blob.seekg(static_cast<std::streamoff>(offset));
    read_f32_le(blob, t.data().data(), t.numel());
    out.push_back({name, t});
  }
  return out;
}

}  // namespace dcdfa
