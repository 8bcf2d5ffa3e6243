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

#include "ovmcl/scan_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ovmcl/geometry.hpp"

namespace ovmcl {

void SensorIntrinsics::validate() const {
  if (height < 2) throw std::invalid_argument("intrinsics: height must be >= 2");
  if (width < 4) throw std::invalid_argument("intrinsics: width must be >= 4");
  if (!(fov_up + fov_down > 0.0)) throw std::invalid_argument("intrinsics: empty vertical fov");
  if (!(r_min >= 0.0 && r_min < r_max)) {
    throw std::invalid_argument("intrinsics: need 0 <= r_min < r_max");
  }
}

SensorIntrinsics desk_intrinsics() {
  SensorIntrinsics intr;
  intr.height = 32;
  intr.width = 180;
  return intr;
}

std::optional<Pixel> project_point(const Eigen::Vector3d& p, const SensorIntrinsics& intr) {
  const double r = p.norm();
  if (!std::isfinite(r) || r <= 0.0 || r < intr.r_min || r > intr.r_max) return std::nullopt;

  const double yaw = std::atan2(p.y(), p.x());
  const double pitch = std::asin(std::clamp(p.z() / r, -1.0, 1.0));
  const double u = 0.5 * (1.0 - yaw / kPi) * intr.width;
  const double v = (1.0 - (pitch + deg2rad(intr.fov_up)) / deg2rad(intr.fov_total())) * intr.height;

  const int col = std::clamp(static_cast<int>(std::floor(u)), 0, intr.width - 1);
  const int row = std::clamp(static_cast<int>(std::floor(v)), 0, intr.height - 1);
  return Pixel{row, col};
}

Eigen::Vector3d pixel_ray(int row, int col, const SensorIntrinsics& intr) {
  const double elevation =
      deg2rad(intr.fov_up) - (row + 0.5) / intr.height * deg2rad(intr.fov_total());
  const double azimuth = kPi * (1.0 - 2.0 * (col + 0.5) / intr.width);
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

RangeImage::RangeImage(const SensorIntrinsics& intr)
    : intr_(intr),
      range_(intr.pixel_count(), kInvalidRange),
      normal_(intr.pixel_count(), Eigen::Vector3f::Zero()) {
  intr_.validate();
}

void RangeImage::set_range(int row, int col, float r) {
  const auto i = index(row, col);
  if (r < 0.0f) {
    range_[i] = kInvalidRange;
    normal_[i].setZero();
  } else {
    range_[i] = r;
  }
}

std::size_t RangeImage::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(range_.begin(), range_.end(), [](float r) { return r >= 0.0f; }));
}

std::size_t RangeImage::normal_count() const {
  return static_cast<std::size_t>(std::count_if(
      normal_.begin(), normal_.end(), [](const Eigen::Vector3f& n) { return n.squaredNorm() > 0.5f; }));
}

Eigen::Vector3d RangeImage::point(int row, int col) const {
  return pixel_ray(row, col, intr_) * static_cast<double>(range(row, col));
}

bool RangeImage::operator==(const RangeImage& other) const {
  return intr_ == other.intr_ && range_ == other.range_ && normal_ == other.normal_;
}

RangeImage spherical_project(const PointCloud& cloud, const SensorIntrinsics& intr) {
  RangeImage img(intr);
  auto ranges = img.ranges();
  for (const auto& p : cloud) {
    const auto px = project_point(p, intr);
    if (!px) continue;
    const auto r = static_cast<float>(p.norm());
    float& cell = ranges[img.index(px->row, px->col)];
    if (cell < 0.0f || r < cell) cell = r;
  }
  return img;
}

RangeImage estimate_normals(RangeImage img) {
  const int rows = img.rows();
  const int cols = img.cols();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      img.clear_normal(i, j);
      if (!img.valid(i, j) || i + 1 >= rows) continue;
      // columns wrap around the full revolution, rows do not
      const int right = (j + 1) % cols;
      if (!img.valid(i, right) || !img.valid(i + 1, j)) continue;

      const Eigen::Vector3d p = img.point(i, j);
      const Eigen::Vector3d a = img.point(i, right) - p;
      const Eigen::Vector3d b = img.point(i + 1, j) - p;
      Eigen::Vector3d n = a.cross(b);
      const double len = n.norm();
      if (!(len > 1e-12)) continue;
      n /= len;
      if (n.dot(-p) < 0.0) n = -n;
      img.set_normal(i, j, n.cast<float>());
    }
  }
  return img;
}

PointCloud unproject(const RangeImage& img) {
  PointCloud cloud;
  cloud.reserve(img.valid_count());
  for (int i = 0; i < img.rows(); ++i) {
    for (int j = 0; j < img.cols(); ++j) {
      if (img.valid(i, j)) cloud.push_back(img.point(i, j));
    }
  }
  return cloud;
}

}  // namespace ovmcl
