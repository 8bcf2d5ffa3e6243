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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ovmcl/geometry.hpp"
#include "ovmcl/scan_model.hpp"

namespace ovmcl {

enum class BoxKind { kBuilding, kCar };

/// Axis-aligned box. `extents` are full side lengths.
struct Box {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d extents = Eigen::Vector3d::Ones();
  BoxKind kind = BoxKind::kBuilding;

  Eigen::Vector3d min() const { return center - 0.5 * extents; }
  Eigen::Vector3d max() const { return center + 0.5 * extents; }
  bool operator==(const Box&) const = default;
};

/// Ground plane z = 0 plus axis-aligned boxes inside rectangular bounds.
struct WorldModel {
  Eigen::Vector2d bounds_min = Eigen::Vector2d::Zero();
  Eigen::Vector2d bounds_max = Eigen::Vector2d(200.0, 200.0);
  std::vector<Box> boxes;

  bool contains(double x, double y) const {
    return x >= bounds_min.x() && x <= bounds_max.x() && y >= bounds_min.y() && y <= bounds_max.y();
  }
  /// Throws std::invalid_argument on boxes outside bounds or with empty extents.
  void validate() const;

  bool operator==(const WorldModel&) const = default;
};

/// Road centerline network and drive routes of the default desk world.
struct DeskLayout {
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> roads;
  std::vector<Eigen::Vector2d> query_route;
  std::vector<Eigen::Vector2d> map_route;
};
DeskLayout desk_layout();

/// 200 m x 200 m block with two road loops, buildings along the streets and
/// parked cars at the curb. Layout is fixed; sizes and placements follow `seed`.
WorldModel make_desk_world(std::uint64_t seed);

/// Nearest hit distance along a unit ray, or nullopt when nothing is hit.
std::optional<double> cast_ray(const WorldModel& world, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir);

/// Exact ray cast of every pixel center from a sensor at `sensor_height`.
/// Hits outside [r_min, r_max] stay invalid. Normals are not filled in.
RangeImage simulate_scan(const WorldModel& world, const Pose2& pose, const SensorIntrinsics& intr,
                         double sensor_height);

struct TrajectorySpec {
  std::vector<Eigen::Vector2d> waypoints;
  double step_length = 2.0;        // meters travelled between scans
  double odom_trans_sigma = 0.02;  // meters, per axis, per step
  double odom_rot_sigma = 0.002;   // radians per step
  std::uint64_t seed = 0;
};

/// Poses sampled every step_length along the waypoint polyline, heading
/// along the current segment. Throws std::invalid_argument for waypoints
/// outside the world bounds or fewer than two waypoints.
std::vector<Pose2> sample_trajectory(const WorldModel& world, const TrajectorySpec& traj);

struct Dataset {
  SensorIntrinsics intrinsics;
  double sensor_height = 1.7;
  std::vector<PointCloud> scans;  // sensor frame
  std::vector<Pose2> poses;       // ground truth, map frame
  std::vector<OdometryControl> odometry;  // odometry[0] is zero motion
};

Dataset generate_dataset(const WorldModel& world, const TrajectorySpec& traj,
                         const SensorIntrinsics& intr, double sensor_height);

/// Writes scans/NNNNNN.bin, poses.txt (3x4 map <- sensor) and odometry.txt under `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& ds, double frame_period = 0.1);

/// Parked-car changes between visits: the chosen fraction of cars is removed
/// or moved along the curb, and a matching number of new cars appears.
/// Buildings are untouched.
WorldModel perturb_world(const WorldModel& world, std::uint64_t seed, double fraction = 0.2);

// Plain-text world description, one box per line.
std::string world_to_text(const WorldModel& world);
WorldModel world_from_text(const std::string& text);
void save_world(const std::filesystem::path& path, const WorldModel& world);
WorldModel load_world(const std::filesystem::path& path);

}  // namespace ovmcl
