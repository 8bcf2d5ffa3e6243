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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "ovmcl/grid_io.hpp"
#include "test_support.hpp"

namespace ovmcl {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kHeaderBytes = 88;

VirtualScanGrid random_grid(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GridGeometry g;
  g.origin = {-4.5, 12.25};
  g.resolution = 0.75;
  g.nx = 9;
  g.ny = 5;
  const SensorIntrinsics intr = testing::small_intrinsics();
  VirtualScanGrid grid(g, intr, 1.73);
  std::bernoulli_distribution occupied(0.4);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (!occupied(rng)) continue;
    grid.set_scan(c, estimate_normals(testing::random_image(intr, 0.6, 0.5, 70.0, rng)));
  }
  return grid;
}

template <typename T>
void poke(std::vector<char>& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

GridFormatError::Kind error_kind(const std::vector<char>& bytes) {
  try {
    deserialize_grid(bytes);
  } catch (const GridFormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no GridFormatError";
  return GridFormatError::Kind::kIo;
}

class GridFile : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ovmcl_grid_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(GridSerialization, RoundTripIsByteExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const VirtualScanGrid grid = random_grid(seed);
    const auto bytes = serialize_grid(grid);
    const VirtualScanGrid back = deserialize_grid(bytes);
    EXPECT_EQ(back, grid);
    EXPECT_EQ(serialize_grid(back), bytes);
  }
}

TEST(GridSerialization, SizeFollowsLayout) {
  const VirtualScanGrid grid = random_grid(7);
  const std::size_t pixels = grid.intrinsics().pixel_count();
  const std::size_t expected = kHeaderBytes + (grid.geometry().cell_count() + 7) / 8 +
                               grid.occupied_count() * pixels * 4 * sizeof(float);
  EXPECT_EQ(serialize_grid(grid).size(), expected);
  const auto bytes = serialize_grid(grid);
  EXPECT_EQ(std::memcmp(bytes.data(), "OVMG", 4), 0);
}

TEST(GridSerialization, EmptyGrid) {
  GridGeometry g;
  g.nx = 3;
  g.ny = 3;
  const VirtualScanGrid grid(g, testing::small_intrinsics(), 1.7);
  const auto bytes = serialize_grid(grid);
  EXPECT_EQ(bytes.size(), kHeaderBytes + 2);
  EXPECT_EQ(deserialize_grid(bytes), grid);
}

TEST(GridSerialization, TypedErrors) {
  const auto good = serialize_grid(random_grid(3));
  using Kind = GridFormatError::Kind;

  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(error_kind(bad), Kind::kBadMagic);

  bad = good;
  poke<std::uint32_t>(bad, 4, 2);
  EXPECT_EQ(error_kind(bad), Kind::kUnsupportedVersion);

  for (const std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{20}, kHeaderBytes - 1,
                                 kHeaderBytes + 3, good.size() - 1}) {
    EXPECT_EQ(error_kind(std::vector<char>(good.begin(), good.begin() + keep)), Kind::kTruncated) << keep;
  }

  bad = good;
  bad.push_back('\0');
  EXPECT_EQ(error_kind(bad), Kind::kCorrupt);

  bad = good;
  poke<std::uint32_t>(bad, 8, 0);  // zero rows
  EXPECT_EQ(error_kind(bad), Kind::kCorrupt);

  bad = good;
  poke<double>(bad, 64, -1.0);  // resolution
  EXPECT_EQ(error_kind(bad), Kind::kCorrupt);

  bad = good;
  poke<double>(bad, 16, std::numeric_limits<double>::quiet_NaN());  // fov_up
  EXPECT_EQ(error_kind(bad), Kind::kCorrupt);

  bad = good;
  poke<std::uint32_t>(bad, 72, 1u << 30);  // nx
  EXPECT_EQ(error_kind(bad), Kind::kCorrupt);

  bad = good;
  poke<std::uint32_t>(bad, 72, 60000);  // plausible but larger than the file
  poke<std::uint32_t>(bad, 76, 60000);
  EXPECT_EQ(error_kind(bad), Kind::kTruncated);

  bad = good;
  const std::size_t first_range = kHeaderBytes + 6;  // 45 cells -> 6 bitmap bytes
  poke<float>(bad, first_range, std::numeric_limits<float>::quiet_NaN());
  EXPECT_EQ(error_kind(bad), Kind::kCorrupt);
}

TEST_F(GridFile, SaveLoadIsByteExact) {
  const VirtualScanGrid grid = random_grid(11);
  const fs::path a = dir_ / "a.ovmg";
  const fs::path b = dir_ / "b.ovmg";
  save_grid(grid, a);
  const VirtualScanGrid loaded = load_grid(a);
  EXPECT_EQ(loaded, grid);
  save_grid(loaded, b);
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  const std::vector<char> ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::vector<char> bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  EXPECT_EQ(ba, bb);
  EXPECT_EQ(ba, serialize_grid(grid));
}

TEST_F(GridFile, MissingFileIsAnIoError) {
  try {
    load_grid(dir_ / "missing.ovmg");
    FAIL();
  } catch (const GridFormatError& e) {
    EXPECT_EQ(e.kind(), GridFormatError::Kind::kIo);
  }
  EXPECT_THROW(save_grid(random_grid(1), dir_ / "no" / "such" / "dir.ovmg"), GridFormatError);
}

}  // namespace
}  // namespace ovmcl
