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

#include "ovmcl/scan_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ovmcl {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "binary formats are read and written as native little-endian");

PointCloud read_point_cloud(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScanIoError("cannot open point cloud " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % (4 * sizeof(float)) != 0) {
    throw ScanIoError("point cloud size is not a multiple of 16 bytes: " + path.string());
  }
  const std::size_t n = bytes.size() / (4 * sizeof(float));
  PointCloud cloud;
  cloud.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<float, 4> v{};
    std::memcpy(v.data(), bytes.data() + i * sizeof(v), sizeof(v));
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
      throw ScanIoError("non-finite point in " + path.string());
    }
    cloud.emplace_back(v[0], v[1], v[2]);
  }
  return cloud;
}

void write_point_cloud(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ScanIoError("cannot write point cloud " + path.string());
  std::vector<float> buf;
  buf.reserve(cloud.size() * 4);
  for (const auto& p : cloud) {
    buf.push_back(static_cast<float>(p.x()));
    buf.push_back(static_cast<float>(p.y()));
    buf.push_back(static_cast<float>(p.z()));
    buf.push_back(0.0f);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw ScanIoError("short write to " + path.string());
}

std::vector<fs::path> list_scan_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ScanIoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

PoseList read_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScanIoError("cannot open pose file " + path.string());
  PoseList poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (!(ss >> t.matrix()(r, c))) {
          throw ScanIoError(path.string() + ":" + std::to_string(line_no) + ": expected 12 values");
        }
      }
    }
    poses.push_back(t);
  }
  return poses;
}

void write_poses(const fs::path& path, const PoseList& poses) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ScanIoError("cannot write pose file " + path.string());
  out << std::setprecision(17);
  for (const auto& t : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        out << t.matrix()(r, c) << ((r == 2 && c == 3) ? '\n' : ' ');
      }
    }
  }
}

std::vector<OdometryRecord> read_odometry(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScanIoError("cannot open odometry file " + path.string());
  std::vector<OdometryRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
    std::istringstream ss(line);
    OdometryRecord rec;
    if (!(ss >> rec.timestamp >> rec.control.dx >> rec.control.dy >> rec.control.dtheta)) {
      throw ScanIoError(path.string() + ":" + std::to_string(line_no) + ": expected 4 values");
    }
    records.push_back(rec);
  }
  return records;
}

void write_odometry(const fs::path& path, const std::vector<OdometryRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ScanIoError("cannot write odometry file " + path.string());
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.timestamp << ' ' << r.control.dx << ' ' << r.control.dy << ' ' << r.control.dtheta
        << '\n';
  }
}

}  // namespace ovmcl
