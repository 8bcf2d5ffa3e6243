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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ovmcl {

/// Points in the sensor (or map) frame, meters.
using PointCloud = std::vector<Eigen::Vector3d>;

/// Spherical projection parameters of a spinning LiDAR. Angles in degrees.
struct SensorIntrinsics {
  int height = 64;
  int width = 900;
  double fov_up = 16.6;
  double fov_down = 16.6;
  double r_min = 0.3;
  double r_max = 75.0;

  /// Throws std::invalid_argument when the parameters are unusable.
  void validate() const;

  double fov_total() const { return fov_up + fov_down; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  /// Azimuth step in degrees.
  double column_step_deg() const { return 360.0 / width; }

  bool operator==(const SensorIntrinsics&) const = default;
};

/// Reduced-resolution sensor used for the desk-scale localization runs.
SensorIntrinsics desk_intrinsics();

struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
};

/// Pixel hit by a point, or nullopt when its range is outside [r_min, r_max].
std::optional<Pixel> project_point(const Eigen::Vector3d& p, const SensorIntrinsics& intr);

/// Unit direction through the center of a pixel.
Eigen::Vector3d pixel_ray(int row, int col, const SensorIntrinsics& intr);

/// H x W image of ranges and surface normals.
///
/// Invalid pixels hold kInvalidRange and a zero normal. Storage is row-major
/// single precision, which is also the on-disk layout of the grid file.
class RangeImage {
 public:
  static constexpr float kInvalidRange = -1.0f;

  RangeImage() = default;
  explicit RangeImage(const SensorIntrinsics& intr);

  const SensorIntrinsics& intrinsics() const { return intr_; }
  int rows() const { return intr_.height; }
  int cols() const { return intr_.width; }
  std::size_t size() const { return range_.size(); }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(intr_.width) +
           static_cast<std::size_t>(col);
  }

  float range(int row, int col) const { return range_[index(row, col)]; }
  bool valid(int row, int col) const { return range_[index(row, col)] >= 0.0f; }
  /// Setting an invalid range also clears the normal.
  void set_range(int row, int col, float r);
  void invalidate(int row, int col) { set_range(row, col, kInvalidRange); }

  const Eigen::Vector3f& normal(int row, int col) const { return normal_[index(row, col)]; }
  bool has_normal(int row, int col) const { return normal_[index(row, col)].squaredNorm() > 0.5f; }
  void set_normal(int row, int col, const Eigen::Vector3f& n) { normal_[index(row, col)] = n; }
  void clear_normal(int row, int col) { normal_[index(row, col)].setZero(); }

  std::span<const float> ranges() const { return range_; }
  std::span<float> ranges() { return range_; }
  std::span<const Eigen::Vector3f> normals() const { return normal_; }
  std::span<Eigen::Vector3f> normals() { return normal_; }

  std::size_t valid_count() const;
  std::size_t normal_count() const;

  /// 3-D point of a valid pixel along its central ray.
  Eigen::Vector3d point(int row, int col) const;

  bool operator==(const RangeImage& other) const;

 private:
  SensorIntrinsics intr_;
  std::vector<float> range_;
  std::vector<Eigen::Vector3f> normal_;
};

/// Z-buffered spherical projection. Each pixel keeps the closest point.
RangeImage spherical_project(const PointCloud& cloud, const SensorIntrinsics& intr);

/// Per-pixel normals from the right and lower neighbors, facing the sensor.
RangeImage estimate_normals(RangeImage img);

/// One point per valid pixel along the pixel's central ray.
PointCloud unproject(const RangeImage& img);

}  // namespace ovmcl
