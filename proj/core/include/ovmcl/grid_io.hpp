// Copyright 2026 The ovmcl Authors
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

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovmcl/map_builder.hpp"

namespace ovmcl {

// Grid file layout, little-endian:
//   "OVMG"  u32 version(=1)
//   u32 height  u32 width  f64 fov_up  f64 fov_down  f64 r_min  f64 r_max
//   f64 origin_x  f64 origin_y  f64 resolution  u32 nx  u32 ny  f64 sensor_height
//   occupancy bitmap, ceil(nx*ny/8) bytes, cell i at bit (i % 8) of byte i / 8
//   per occupied cell in index order: f32 range[H*W], f32 normal_x[H*W],
//   f32 normal_y[H*W], f32 normal_z[H*W]
inline constexpr char kGridMagic[4] = {'O', 'V', 'M', 'G'};
inline constexpr std::uint32_t kGridVersion = 1;

class GridFormatError : public std::runtime_error {
 public:
  enum class Kind { kIo, kBadMagic, kUnsupportedVersion, kTruncated, kCorrupt };

  GridFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<char> serialize_grid(const VirtualScanGrid& grid);
VirtualScanGrid deserialize_grid(const std::vector<char>& bytes);

void save_grid(const VirtualScanGrid& grid, const std::filesystem::path& path);
VirtualScanGrid load_grid(const std::filesystem::path& path);

}  // namespace ovmcl
