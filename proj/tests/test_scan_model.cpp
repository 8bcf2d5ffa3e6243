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

#include <algorithm>
#include <map>
#include <random>

#include "ovmcl/geometry.hpp"
#include "ovmcl/scan_model.hpp"
#include "ovmcl/sim_world.hpp"
#include "test_support.hpp"

namespace ovmcl {
namespace {

using testing::reference_pixel;
using testing::reference_ray;

TEST(SensorIntrinsics, DefaultsAreValid) {
  const SensorIntrinsics intr;
  EXPECT_NO_THROW(intr.validate());
  EXPECT_EQ(intr.height, 64);
  EXPECT_EQ(intr.width, 900);
}

TEST(SensorIntrinsics, RejectsBadParameters) {
  SensorIntrinsics a;
  a.height = 1;
  EXPECT_THROW(a.validate(), std::invalid_argument);
  SensorIntrinsics b;
  b.width = 3;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  SensorIntrinsics c;
  c.fov_up = -10.0;
  c.fov_down = 5.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  SensorIntrinsics d;
  d.r_min = 80.0;
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(SphericalProject, ForwardPointLandsInCenter) {
  SensorIntrinsics intr;
  intr.fov_up = 15.0;
  intr.fov_down = 15.0;
  const RangeImage img = spherical_project({{10.0, 0.0, 0.0}}, intr);
  EXPECT_EQ(img.valid_count(), 1u);
  EXPECT_TRUE(img.valid(intr.height / 2, intr.width / 2));
  EXPECT_FLOAT_EQ(img.range(intr.height / 2, intr.width / 2), 10.0f);
}

TEST(SphericalProject, EmptyCloudGivesEmptyImage) {
  const RangeImage img = spherical_project({}, SensorIntrinsics{});
  EXPECT_EQ(img.valid_count(), 0u);
  EXPECT_EQ(img.normal_count(), 0u);
}

TEST(SphericalProject, DiscardsPointsOutsideRangeLimits) {
  SensorIntrinsics intr;
  const RangeImage img =
      spherical_project({{0.1, 0.0, 0.0}, {100.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}, intr);
  EXPECT_EQ(img.valid_count(), 0u);
}

TEST(SphericalProject, MatchesExhaustiveZBufferOracle) {
  std::mt19937_64 rng(11);
  const SensorIntrinsics intr;
  const PointCloud cloud = testing::random_shell(10000, 2.0, 50.0, rng);

  std::map<std::pair<int, int>, double> oracle;
  for (const auto& p : cloud) {
    const auto px = reference_pixel(p, intr);
    const auto it = oracle.find(px);
    if (it == oracle.end() || p.norm() < it->second) oracle[px] = p.norm();
  }

  const RangeImage img = spherical_project(cloud, intr);
  EXPECT_EQ(img.valid_count(), oracle.size());
  for (const auto& [px, r] : oracle) {
    ASSERT_TRUE(img.valid(px.first, px.second));
    EXPECT_EQ(img.range(px.first, px.second), static_cast<float>(r));
  }
}

TEST(SphericalProject, PermutationInvariantAndZBuffered) {
  std::mt19937_64 rng(5);
  const SensorIntrinsics intr = testing::small_intrinsics();
  for (int trial = 0; trial < 10; ++trial) {
    PointCloud cloud = testing::random_shell(3000, 1.0, 60.0, rng);
    const RangeImage a = spherical_project(cloud, intr);
    std::shuffle(cloud.begin(), cloud.end(), rng);
    EXPECT_EQ(a, spherical_project(cloud, intr));
    for (const auto& p : cloud) {
      const auto px = project_point(p, intr);
      ASSERT_TRUE(px.has_value());
      EXPECT_LE(a.range(px->row, px->col), static_cast<float>(p.norm()));
    }
  }
}

TEST(EstimateNormals, FlatGroundPointsUp) {
  WorldModel ground_only;
  ground_only.bounds_min = {-100, -100};
  ground_only.bounds_max = {100, 100};
  const SensorIntrinsics intr;
  const RangeImage img =
      estimate_normals(simulate_scan(ground_only, {0.0, 0.0, 0.0}, intr, 1.5));
  ASSERT_GT(img.normal_count(), 1000u);

  for (int i = 0; i < img.rows(); ++i) {
    for (int j = 0; j < img.cols(); ++j) {
      if (!img.has_normal(i, j)) continue;
      // the three points spanning the normal all sit on z = -1.5
      EXPECT_NEAR(img.point(i, j).z(), -1.5, 1e-4);
      EXPECT_NEAR(img.point(i, (j + 1) % img.cols()).z(), -1.5, 1e-4);
      EXPECT_NEAR(img.point(i + 1, j).z(), -1.5, 1e-4);
      EXPECT_LT((img.normal(i, j).cast<double>() - Eigen::Vector3d::UnitZ()).norm(), 1e-3);
    }
  }
}

TEST(EstimateNormals, WallFacesSensor) {
  WorldModel w;
  w.bounds_min = {-100, -100};
  w.bounds_max = {100, 100};
  Box wall;
  wall.center = {25.0, 0.0, 25.0};
  wall.extents = {10.0, 160.0, 50.0};
  w.boxes.push_back(wall);
  const SensorIntrinsics intr;
  const RangeImage img = estimate_normals(simulate_scan(w, {0.0, 0.0, 0.0}, intr, 1.7));

  auto on_wall = [&](int i, int j) {
    return img.valid(i, j) && std::abs(img.point(i, j).x() - 20.0) < 1e-3;
  };
  std::size_t checked = 0;
  for (int i = 0; i + 1 < img.rows(); ++i) {
    for (int j = 0; j < img.cols(); ++j) {
      if (!on_wall(i, j) || !on_wall(i, (j + 1) % img.cols()) || !on_wall(i + 1, j)) continue;
      ASSERT_TRUE(img.has_normal(i, j));
      EXPECT_LT((img.normal(i, j).cast<double>() - Eigen::Vector3d(-1, 0, 0)).norm(), 1e-3);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(EstimateNormals, IsolatedPixelHasNoNormal) {
  RangeImage img(testing::small_intrinsics());
  img.set_range(4, 7, 12.0f);
  const RangeImage out = estimate_normals(img);
  EXPECT_FALSE(out.has_normal(4, 7));
  EXPECT_EQ(out.normal_count(), 0u);
}

TEST(EstimateNormals, NormalsAreUnitAndFaceSensor) {
  const WorldModel w = testing::small_world();
  const SensorIntrinsics intr;
  const RangeImage img = estimate_normals(simulate_scan(w, {1.0, -2.0, 0.4}, intr, 1.7));
  ASSERT_GT(img.normal_count(), 0u);
  for (int i = 0; i < img.rows(); ++i) {
    for (int j = 0; j < img.cols(); ++j) {
      if (!img.valid(i, j)) {
        EXPECT_FALSE(img.has_normal(i, j));
        continue;
      }
      if (!img.has_normal(i, j)) continue;
      const Eigen::Vector3d n = img.normal(i, j).cast<double>();
      EXPECT_NEAR(n.norm(), 1.0, 1e-6);
      EXPECT_GE(n.dot(-pixel_ray(i, j, intr)), 0.0);
    }
  }
}

TEST(Unproject, EmptyImageGivesEmptyCloud) {
  EXPECT_TRUE(unproject(RangeImage(SensorIntrinsics{})).empty());
}

TEST(Unproject, CenterPixelPointsForward) {
  const SensorIntrinsics intr;
  RangeImage img(intr);
  img.set_range(intr.height / 2, intr.width / 2, 10.0f);
  const PointCloud c = unproject(img);
  ASSERT_EQ(c.size(), 1u);
  // half a pixel off the axis in both directions
  const double tol = 10.0 * deg2rad(std::max(intr.column_step_deg(), intr.fov_total() / intr.height));
  EXPECT_NEAR(c[0].x(), 10.0, tol);
  EXPECT_NEAR(c[0].y(), 0.0, tol);
  EXPECT_NEAR(c[0].z(), 0.0, tol);
}

TEST(Unproject, RayMatchesReference) {
  const SensorIntrinsics intr = testing::small_intrinsics();
  for (int i = 0; i < intr.height; ++i) {
    for (int j = 0; j < intr.width; ++j) {
      EXPECT_LT((pixel_ray(i, j, intr) - reference_ray(i, j, intr)).norm(), 1e-12);
    }
  }
}

TEST(Unproject, RoundTripPreservesRanges) {
  std::mt19937_64 rng(3);
  for (const auto& intr : {SensorIntrinsics{}, testing::small_intrinsics(), desk_intrinsics()}) {
    const RangeImage img = testing::random_image(intr, 0.6, 0.5, 74.0, rng);
    const RangeImage back = spherical_project(unproject(img), intr);
    ASSERT_EQ(back.valid_count(), img.valid_count());
    for (int i = 0; i < intr.height; ++i) {
      for (int j = 0; j < intr.width; ++j) {
        ASSERT_EQ(back.valid(i, j), img.valid(i, j));
        if (img.valid(i, j)) EXPECT_NEAR(back.range(i, j), img.range(i, j), 1e-6);
      }
    }
  }
}

TEST(RangeImage, InvalidatingClearsNormal) {
  RangeImage img(testing::small_intrinsics());
  img.set_range(1, 1, 5.0f);
  img.set_normal(1, 1, Eigen::Vector3f::UnitX());
  EXPECT_TRUE(img.has_normal(1, 1));
  img.invalidate(1, 1);
  EXPECT_FALSE(img.valid(1, 1));
  EXPECT_FALSE(img.has_normal(1, 1));
}

}  // namespace
}  // namespace ovmcl
