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

#include "ovmcl/grid_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ovmcl {

static_assert(std::endian::native == std::endian::little,
              "grid files are written as native little-endian");

namespace {

using Kind = GridFormatError::Kind;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  std::vector<char> take() { return std::move(buf_); }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& buf) : buf_(buf) {}

  template <typename T>
  T get() {
    T v;
    get_bytes(&v, sizeof(T));
    return v;
  }
  void get_bytes(void* out, std::size_t n) {
    if (buf_.size() - pos_ < n) throw GridFormatError(Kind::kTruncated, "grid file truncated");
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<char> serialize_grid(const VirtualScanGrid& grid) {
  const auto& intr = grid.intrinsics();
  const auto& geom = grid.geometry();
  Writer w;
  w.put_bytes(kGridMagic, sizeof(kGridMagic));
  w.put<std::uint32_t>(kGridVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(intr.height));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(intr.width));
  w.put<double>(intr.fov_up);
  w.put<double>(intr.fov_down);
  w.put<double>(intr.r_min);
  w.put<double>(intr.r_max);
  w.put<double>(geom.origin.x());
  w.put<double>(geom.origin.y());
  w.put<double>(geom.resolution);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(geom.nx));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(geom.ny));
  w.put<double>(grid.sensor_height());

  std::vector<std::uint8_t> bitmap((geom.cell_count() + 7) / 8, 0);
  const auto cells = grid.occupied_cells();
  for (const auto c : cells) bitmap[c / 8] |= static_cast<std::uint8_t>(1u << (c % 8));
  w.put_bytes(bitmap.data(), bitmap.size());

  const std::size_t n = intr.pixel_count();
  std::vector<float> plane(n);
  for (const auto c : cells) {
    const auto& img = grid.scan(c);
    w.put_bytes(img.ranges().data(), n * sizeof(float));
    for (int axis = 0; axis < 3; ++axis) {
      const auto normals = img.normals();
      for (std::size_t i = 0; i < n; ++i) plane[i] = normals[i][axis];
      w.put_bytes(plane.data(), n * sizeof(float));
    }
  }
  return w.take();
}

VirtualScanGrid deserialize_grid(const std::vector<char>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kGridMagic, sizeof(magic)) != 0) {
    throw GridFormatError(Kind::kBadMagic, "not a grid file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kGridVersion) {
    throw GridFormatError(Kind::kUnsupportedVersion,
                          "unsupported grid version " + std::to_string(version));
  }

  SensorIntrinsics intr;
  intr.height = static_cast<int>(r.get<std::uint32_t>());
  intr.width = static_cast<int>(r.get<std::uint32_t>());
  intr.fov_up = r.get<double>();
  intr.fov_down = r.get<double>();
  intr.r_min = r.get<double>();
  intr.r_max = r.get<double>();
  GridGeometry geom;
  geom.origin.x() = r.get<double>();
  geom.origin.y() = r.get<double>();
  geom.resolution = r.get<double>();
  const auto nx = r.get<std::uint32_t>();
  const auto ny = r.get<std::uint32_t>();
  const auto sensor_height = r.get<double>();

  constexpr std::uint32_t kMaxDim = 1u << 20;
  constexpr std::uint32_t kMaxPixels = 1u << 24;
  if (nx > kMaxDim || ny > kMaxDim || intr.height <= 0 || intr.width <= 0 ||
      static_cast<std::uint64_t>(intr.height) * static_cast<std::uint64_t>(intr.width) > kMaxPixels) {
    throw GridFormatError(Kind::kCorrupt, "grid header has implausible dimensions");
  }
  geom.nx = static_cast<int>(nx);
  geom.ny = static_cast<int>(ny);

  // check the bitmap fits before allocating per-cell storage
  if (r.remaining() < (geom.cell_count() + 7) / 8) {
    throw GridFormatError(Kind::kTruncated, "grid file truncated");
  }

  VirtualScanGrid grid;
  try {
    grid = VirtualScanGrid(geom, intr, sensor_height);
  } catch (const std::invalid_argument& e) {
    throw GridFormatError(Kind::kCorrupt, std::string("grid header invalid: ") + e.what());
  }

  std::vector<std::uint8_t> bitmap((geom.cell_count() + 7) / 8);
  r.get_bytes(bitmap.data(), bitmap.size());

  const std::size_t n = intr.pixel_count();
  std::vector<float> plane(n);
  for (std::size_t c = 0; c < geom.cell_count(); ++c) {
    if (!(bitmap[c / 8] & (1u << (c % 8)))) continue;
    RangeImage img(intr);
    r.get_bytes(img.ranges().data(), n * sizeof(float));
    auto normals = img.normals();
    for (int axis = 0; axis < 3; ++axis) {
      r.get_bytes(plane.data(), n * sizeof(float));
      for (std::size_t i = 0; i < n; ++i) normals[i][axis] = plane[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const float range = img.ranges()[i];
      const bool ok = range == RangeImage::kInvalidRange || (std::isfinite(range) && range > 0.0f);
      if (!ok || !normals[i].allFinite()) {
        throw GridFormatError(Kind::kCorrupt, "grid cell holds an invalid range or normal");
      }
    }
    grid.set_scan(c, std::move(img));
  }
  if (r.remaining() != 0) throw GridFormatError(Kind::kCorrupt, "trailing bytes after grid data");
  return grid;
}

void save_grid(const VirtualScanGrid& grid, const std::filesystem::path& path) {
  const auto bytes = serialize_grid(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GridFormatError(Kind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw GridFormatError(Kind::kIo, "short write to " + path.string());
}

VirtualScanGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GridFormatError(Kind::kIo, "cannot open " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_grid(bytes);
}

}  // namespace ovmcl
