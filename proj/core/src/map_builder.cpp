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

#include "ovmcl/map_builder.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace ovmcl {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

VoxelKey voxel_of(const Eigen::Vector3d& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)),
          static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

double distance_to_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                           const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

// Planar bins of map points for "is there a point near this cell" queries.
class PlanarIndex {
 public:
  PlanarIndex(const PointCloud& pts, double bin) : bin_(bin) {
    for (const auto& p : pts) bins_[key(p.x(), p.y())].push_back({p.x(), p.y()});
  }

  bool any_within(const Eigen::Vector2d& c, double radius) const {
    const auto [kx, ky] = key(c.x(), c.y());
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / bin_));
    const double r2 = radius * radius;
    for (std::int64_t dx = -reach; dx <= reach; ++dx) {
      for (std::int64_t dy = -reach; dy <= reach; ++dy) {
        const auto it = bins_.find({kx + dx, ky + dy});
        if (it == bins_.end()) continue;
        for (const auto& q : it->second) {
          if ((q - c).squaredNorm() <= r2) return true;
        }
      }
    }
    return false;
  }

 private:
  struct Key {
    std::int64_t x, y;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return static_cast<std::size_t>(static_cast<std::uint64_t>(k.x) * 73856093ULL ^
                                      static_cast<std::uint64_t>(k.y) * 19349663ULL);
    }
  };
  Key key(double x, double y) const {
    return {static_cast<std::int64_t>(std::floor(x / bin_)),
            static_cast<std::int64_t>(std::floor(y / bin_))};
  }

  double bin_;
  std::unordered_map<Key, std::vector<Eigen::Vector2d>, KeyHash> bins_;
};

}  // namespace

AggregatedCloud aggregate(const std::vector<PointCloud>& scans, const PoseList& poses,
                          double voxel_size) {
  if (scans.size() != poses.size()) {
    throw std::invalid_argument("aggregate: scan and pose counts differ");
  }
  if (!(voxel_size > 0.0)) throw std::invalid_argument("aggregate: voxel_size must be > 0");

  AggregatedCloud out;
  out.voxel_size = voxel_size;
  std::unordered_set<VoxelKey, VoxelKeyHash> seen;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    out.viewpoints.emplace_back(poses[s].translation().x(), poses[s].translation().y());
    for (const auto& p : scans[s]) {
      const Eigen::Vector3d q = poses[s] * p;
      if (seen.insert(voxel_of(q, voxel_size)).second) out.points.push_back(q);
    }
  }
  return out;
}

std::optional<CellIndex> GridGeometry::world_to_cell(double x, double y) const {
  const double fx = std::floor((x - origin.x()) / resolution);
  const double fy = std::floor((y - origin.y()) / resolution);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < nx && fy < ny)) return std::nullopt;
  return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

VirtualScanGrid::VirtualScanGrid(const GridGeometry& geometry, const SensorIntrinsics& intr,
                                 double sensor_height)
    : geometry_(geometry), intr_(intr), sensor_height_(sensor_height),
      slot_(geometry.cell_count(), -1) {
  intr_.validate();
  if (!(geometry.resolution > 0.0)) throw std::invalid_argument("grid: resolution must be > 0");
  if (geometry.nx < 0 || geometry.ny < 0) throw std::invalid_argument("grid: negative dimensions");
}

const RangeImage& VirtualScanGrid::scan(std::size_t cell) const {
  const auto s = slot_.at(cell);
  if (s < 0) throw std::out_of_range("grid: cell is not occupied");
  return scans_[static_cast<std::size_t>(s)];
}

void VirtualScanGrid::set_scan(std::size_t cell, RangeImage img) {
  if (!(img.intrinsics() == intr_)) throw std::invalid_argument("grid: scan intrinsics differ");
  auto& s = slot_.at(cell);
  if (s >= 0) {
    scans_[static_cast<std::size_t>(s)] = std::move(img);
    return;
  }
  if (static_cast<std::ptrdiff_t>(cell) > last_cell_) {
    s = static_cast<std::int32_t>(scans_.size());
    scans_.push_back(std::move(img));
    last_cell_ = static_cast<std::ptrdiff_t>(cell);
    return;
  }
  // keep scans_ in cell order so serialization order matches the bitmap
  std::size_t rank = 0;
  for (std::size_t i = 0; i < cell; ++i) rank += slot_[i] >= 0 ? 1 : 0;
  scans_.insert(scans_.begin() + static_cast<std::ptrdiff_t>(rank), std::move(img));
  s = static_cast<std::int32_t>(rank);
  for (std::size_t i = cell + 1; i < slot_.size(); ++i) {
    if (slot_[i] >= 0) ++slot_[i];
  }
}

std::vector<std::size_t> VirtualScanGrid::occupied_cells() const {
  std::vector<std::size_t> cells;
  cells.reserve(scans_.size());
  for (std::size_t i = 0; i < slot_.size(); ++i) {
    if (slot_[i] >= 0) cells.push_back(i);
  }
  return cells;
}

std::optional<std::size_t> VirtualScanGrid::lookup(double x, double y) const {
  const auto c = geometry_.world_to_cell(x, y);
  if (!c) return std::nullopt;
  const auto i = geometry_.linear(*c);
  if (slot_[i] < 0) return std::nullopt;
  return i;
}

bool VirtualScanGrid::operator==(const VirtualScanGrid& other) const {
  return geometry_ == other.geometry_ && intr_ == other.intr_ &&
         sensor_height_ == other.sensor_height_ && slot_ == other.slot_ &&
         scans_ == other.scans_;
}

RangeImage render_virtual_scan(const AggregatedCloud& cloud, double x, double y,
                               const SensorIntrinsics& intr, double sensor_height) {
  RangeImage img(intr);
  auto ranges = img.ranges();
  const Eigen::Vector3d sensor(x, y, sensor_height);
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d q = p - sensor;
    // cheap reject before the trigonometry in project_point
    if (std::abs(q.x()) > intr.r_max || std::abs(q.y()) > intr.r_max) continue;
    const auto px = project_point(q, intr);
    if (!px) continue;
    const auto r = static_cast<float>(q.norm());
    float& cell = ranges[img.index(px->row, px->col)];
    if (cell < 0.0f || r < cell) cell = r;
  }
  return estimate_normals(std::move(img));
}

VirtualScanGrid build_grid(const AggregatedCloud& cloud, const GridOptions& opts,
                           GridBuildReport* report) {
  if (cloud.points.empty()) throw std::invalid_argument("build_grid: empty map cloud");
  if (!(opts.resolution > 0.0)) throw std::invalid_argument("build_grid: resolution must be > 0");
  const Eigen::Vector2d extent = opts.bounds_max - opts.bounds_min;
  if (!(extent.x() > 0.0 && extent.y() > 0.0)) throw std::invalid_argument("build_grid: empty bounds");
  const bool any_inside = std::any_of(cloud.points.begin(), cloud.points.end(), [&](const auto& p) {
    return p.x() >= opts.bounds_min.x() && p.x() <= opts.bounds_max.x() &&
           p.y() >= opts.bounds_min.y() && p.y() <= opts.bounds_max.y();
  });
  if (!any_inside) throw std::invalid_argument("build_grid: no map points inside bounds");
  if (opts.corridor_radius > 0.0 && cloud.viewpoints.empty()) {
    throw std::invalid_argument("build_grid: corridor requested but cloud has no viewpoints");
  }

  GridGeometry geom;
  geom.origin = opts.bounds_min;
  geom.resolution = opts.resolution;
  geom.nx = static_cast<int>(std::ceil(extent.x() / opts.resolution - 1e-9));
  geom.ny = static_cast<int>(std::ceil(extent.y() / opts.resolution - 1e-9));

  const double support = opts.support_radius > 0.0 ? opts.support_radius : opts.resolution;
  const PlanarIndex index(cloud.points, std::max(support, 0.25));

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < geom.cell_count(); ++i) {
    const Eigen::Vector2d c = geom.cell_center(geom.unlinear(i));
    if (opts.corridor_radius > 0.0) {
      bool near = cloud.viewpoints.size() == 1 &&
                  (cloud.viewpoints[0] - c).norm() <= opts.corridor_radius;
      for (std::size_t v = 1; !near && v < cloud.viewpoints.size(); ++v) {
        near = distance_to_segment(c, cloud.viewpoints[v - 1], cloud.viewpoints[v]) <=
               opts.corridor_radius;
      }
      if (!near) continue;
    }
    if (index.any_within(c, support)) candidates.push_back(i);
  }

  std::vector<RangeImage> rendered(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(candidates.size()); ++k) {
    const Eigen::Vector2d c = geom.cell_center(geom.unlinear(candidates[static_cast<std::size_t>(k)]));
    rendered[static_cast<std::size_t>(k)] =
        render_virtual_scan(cloud, c.x(), c.y(), opts.intrinsics, opts.sensor_height);
  }

  VirtualScanGrid grid(geom, opts.intrinsics, opts.sensor_height);
  std::size_t occupied = 0;
  // candidates are increasing, so appending keeps the cell order
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (rendered[k].valid_count() >= opts.min_valid_pixels) {
      grid.set_scan(candidates[k], std::move(rendered[k]));
      ++occupied;
    }
  }
  if (report) *report = {geom.cell_count(), candidates.size(), occupied};
  return grid;
}

}  // namespace ovmcl
