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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ovmcl/scan_io.hpp"
#include "ovmcl/scan_model.hpp"

namespace ovmcl {

/// Map-frame point cloud with at most one point per voxel.
struct AggregatedCloud {
  PointCloud points;
  double voxel_size = 0.1;
  /// Sensor positions (x, y) of the aggregated scans, in scan order.
  std::vector<Eigen::Vector2d> viewpoints;
};

/// Transforms every scan into the map frame and keeps the first point that
/// falls into each voxel. Throws std::invalid_argument on a count mismatch.
AggregatedCloud aggregate(const std::vector<PointCloud>& scans, const PoseList& poses,
                          double voxel_size);

struct CellIndex {
  int ix = 0;
  int iy = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Regular 2-D grid. Cell (ix, iy) covers
/// [origin + ix * resolution, origin + (ix + 1) * resolution) in x, same in y.
struct GridGeometry {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double resolution = 1.0;
  int nx = 0;
  int ny = 0;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t linear(const CellIndex& c) const {
    return static_cast<std::size_t>(c.iy) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(c.ix);
  }
  CellIndex unlinear(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(nx)),
            static_cast<int>(i / static_cast<std::size_t>(nx))};
  }
  Eigen::Vector2d cell_center(const CellIndex& c) const {
    return origin + resolution * Eigen::Vector2d(c.ix + 0.5, c.iy + 0.5);
  }
  std::optional<CellIndex> world_to_cell(double x, double y) const;

  bool operator==(const GridGeometry&) const = default;
};

/// Virtual range images rendered at grid cell centers, all facing yaw 0.
class VirtualScanGrid {
 public:
  VirtualScanGrid() = default;
  VirtualScanGrid(const GridGeometry& geometry, const SensorIntrinsics& intr, double sensor_height);

  const GridGeometry& geometry() const { return geometry_; }
  const SensorIntrinsics& intrinsics() const { return intr_; }
  double sensor_height() const { return sensor_height_; }

  bool occupied(std::size_t cell) const { return slot_[cell] >= 0; }
  bool occupied(const CellIndex& c) const { return occupied(geometry_.linear(c)); }
  /// Scan of an occupied cell.
  const RangeImage& scan(std::size_t cell) const;
  const RangeImage& scan(const CellIndex& c) const { return scan(geometry_.linear(c)); }

  /// Stores `img` for the cell, replacing any earlier scan.
  void set_scan(std::size_t cell, RangeImage img);

  std::size_t occupied_count() const { return scans_.size(); }
  /// Linear indices of occupied cells in increasing order.
  std::vector<std::size_t> occupied_cells() const;

  /// Occupied cell containing (x, y), or nullopt when off-grid or unoccupied.
  std::optional<std::size_t> lookup(double x, double y) const;

  bool operator==(const VirtualScanGrid& other) const;

 private:
  GridGeometry geometry_;
  SensorIntrinsics intr_;
  double sensor_height_ = 1.7;
  std::vector<std::int32_t> slot_;
  std::vector<RangeImage> scans_;
  std::ptrdiff_t last_cell_ = -1;
};

struct GridOptions {
  double resolution = 1.0;
  Eigen::Vector2d bounds_min = Eigen::Vector2d::Zero();
  Eigen::Vector2d bounds_max = Eigen::Vector2d::Zero();
  double sensor_height = 1.7;
  SensorIntrinsics intrinsics;
  /// Valid pixels needed for a cell to count as occupied.
  std::size_t min_valid_pixels = 100;
  /// A cell is rendered only if a map point lies within this planar distance
  /// of its center. Non-positive means "one grid resolution".
  double support_radius = 0.0;
  /// When positive, cells farther than this from the viewpoint polyline of
  /// the aggregated cloud are skipped.
  double corridor_radius = 0.0;
};

struct GridBuildReport {
  std::size_t cells_total = 0;
  std::size_t cells_attempted = 0;
  std::size_t cells_occupied = 0;
};

/// Virtual scan at (x, y, sensor_height), yaw 0, normals included.
RangeImage render_virtual_scan(const AggregatedCloud& cloud, double x, double y,
                               const SensorIntrinsics& intr, double sensor_height);

/// Throws std::invalid_argument when the cloud is empty, no point lies inside
/// the bounds, or the resolution is not positive.
VirtualScanGrid build_grid(const AggregatedCloud& cloud, const GridOptions& opts,
                           GridBuildReport* report = nullptr);

}  // namespace ovmcl
