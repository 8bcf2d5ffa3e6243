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

#include <Eigen/Geometry>

#include "ovmcl/geometry.hpp"
#include "ovmcl/scan_model.hpp"

namespace ovmcl {

class ScanIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point clouds: little-endian float32 quadruples (x, y, z, intensity).
// Intensity is ignored on read and written as zero.
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

/// All *.bin files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_scan_files(const std::filesystem::path& dir);

// Poses: one line per scan, 12 floats of the row-major 3x4 map <- sensor transform.
using PoseList = std::vector<Eigen::Isometry3d, Eigen::aligned_allocator<Eigen::Isometry3d>>;
PoseList read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const PoseList& poses);

struct OdometryRecord {
  double timestamp = 0.0;
  OdometryControl control;
};

// Odometry: one line per scan, "timestamp dx dy dtheta". The control on line t
// moves the sensor from scan t-1 to scan t; the first line carries zero motion.
std::vector<OdometryRecord> read_odometry(const std::filesystem::path& path);
void write_odometry(const std::filesystem::path& path, const std::vector<OdometryRecord>& records);

}  // namespace ovmcl
