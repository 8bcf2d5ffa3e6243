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

#include "ovmcl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace ovmcl {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(k.x) * 73856093ULL ^
                                    static_cast<std::uint64_t>(k.y) * 19349663ULL ^
                                    static_cast<std::uint64_t>(k.z) * 83492791ULL);
  }
};

// Chebyshev dilation of a 0/1 volume along one axis with a sliding window count.
void dilate_axis(std::vector<std::uint8_t>& vol, const std::array<int, 3>& dims, int axis, int radius) {
  const std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(dims[0]),
                                          static_cast<std::size_t>(dims[0]) * dims[1]};
  const int n = dims[axis];
  const int a1 = (axis + 1) % 3;
  const int a2 = (axis + 2) % 3;
  std::vector<std::uint8_t> line(static_cast<std::size_t>(n));
  for (int i2 = 0; i2 < dims[a2]; ++i2) {
    for (int i1 = 0; i1 < dims[a1]; ++i1) {
      const std::size_t base = i1 * stride[a1] + i2 * stride[a2];
      for (int i = 0; i < n; ++i) line[i] = vol[base + i * stride[axis]];
      int count = 0;
      for (int i = 0; i < std::min(radius, n); ++i) count += line[i];
      for (int i = 0; i < n; ++i) {
        if (i + radius < n) count += line[i + radius];
        if (i - radius - 1 >= 0) count -= line[i - radius - 1];
        vol[base + i * stride[axis]] = count > 0 ? 1 : 0;
      }
    }
  }
}

}  // namespace

LikelihoodField::LikelihoodField(const PointCloud& map_points, const LikelihoodFieldParams& params)
    : params_(params) {
  if (!(params_.voxel_size > 0.0)) throw std::invalid_argument("LikelihoodField: voxel_size must be > 0");
  if (!(params_.sigma_hit > 0.0)) throw std::invalid_argument("LikelihoodField: sigma_hit must be > 0");
  if (!(params_.index_cell > 0.0)) throw std::invalid_argument("LikelihoodField: index_cell must be > 0");
  if (!(params_.max_distance > 0.0)) {
    throw std::invalid_argument("LikelihoodField: max_distance must be > 0");
  }
  if (params_.sample_count == 0) throw std::invalid_argument("LikelihoodField: sample_count must be > 0");

  std::unordered_set<VoxelKey, VoxelHash> seen;
  const double v = params_.voxel_size;
  for (const auto& p : map_points) {
    const VoxelKey k{static_cast<std::int64_t>(std::floor(p.x() / v)),
                     static_cast<std::int64_t>(std::floor(p.y() / v)),
                     static_cast<std::int64_t>(std::floor(p.z() / v))};
    if (seen.insert(k).second) points_.push_back(p);
  }
  if (points_.empty()) return;

  // Points in cells more than max_ring_ apart are at least max_ring_ - 1
  // cells away, which is past the cap.
  const double cell = params_.index_cell;
  max_ring_ = static_cast<int>(std::ceil(params_.max_distance / cell)) + 1;
  const int pad = max_ring_ + 1;
  Eigen::Vector3d lo = points_.front();
  Eigen::Vector3d hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::size_t total = 1;
  for (int a = 0; a < 3; ++a) {
    origin_[a] = (std::floor(lo[a] / cell) - pad) * cell;
    const double span = std::floor((hi[a] - origin_[a]) / cell) + 1.0 + pad;
    if (span > 1e5) throw std::invalid_argument("LikelihoodField: map extent too large for index_cell");
    dims_[a] = static_cast<int>(span);
    total *= static_cast<std::size_t>(dims_[a]);
  }
  if (total > (std::size_t{1} << 28)) {
    throw std::invalid_argument("LikelihoodField: map extent too large for index_cell");
  }

  std::vector<std::uint32_t> cell_of(points_.size());
  cell_start_.assign(total + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Eigen::Vector3d rel = (points_[i] - origin_) / cell;
    const auto x = static_cast<std::size_t>(rel.x());
    const auto y = static_cast<std::size_t>(rel.y());
    const auto z = static_cast<std::size_t>(rel.z());
    cell_of[i] = static_cast<std::uint32_t>(x + dims_[0] * (y + dims_[1] * z));
    ++cell_start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_points_.resize(points_.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    cell_points_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  near_.assign(total, 0);
  for (const auto c : cell_of) near_[c] = 1;
  for (int a = 0; a < 3; ++a) dilate_axis(near_, dims_, a, max_ring_);
}

double LikelihoodField::nearest_distance(const Eigen::Vector3d& q) const {
  const double cap = params_.max_distance;
  if (points_.empty()) return cap;
  const double cell = params_.index_cell;
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((q[a] - origin_[a]) / cell);
    if (f < 0.0 || f >= dims_[a]) return cap;
    c[a] = static_cast<int>(f);
  }
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto nxy = nx * static_cast<std::size_t>(dims_[1]);
  if (!near_[c[0] + nx * c[1] + nxy * c[2]]) return cap;

  double best2 = std::numeric_limits<double>::infinity();
  auto scan_cell = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= dims_[0] || y >= dims_[1] || z >= dims_[2]) return;
    const std::size_t id = x + nx * y + nxy * z;
    for (auto k = cell_start_[id]; k < cell_start_[id + 1]; ++k) {
      best2 = std::min(best2, (points_[cell_points_[k]] - q).squaredNorm());
    }
  };

  // Ring r is the shell of cells at Chebyshev distance r. Points beyond ring r
  // are at least r * cell away from q, which bounds when we can stop.
  for (int r = 0; r <= max_ring_; ++r) {
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        const bool edge = std::abs(dx) == r || std::abs(dy) == r;
        if (edge) {
          for (int dz = -r; dz <= r; ++dz) scan_cell(c[0] + dx, c[1] + dy, c[2] + dz);
        } else {
          scan_cell(c[0] + dx, c[1] + dy, c[2] - r);
          if (r > 0) scan_cell(c[0] + dx, c[1] + dy, c[2] + r);
        }
      }
    }
    const double reach = static_cast<double>(r) * cell;
    if (best2 <= reach * reach || reach >= cap) break;
  }
  return std::min(std::sqrt(best2), cap);
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t count) {
  std::vector<std::size_t> idx;
  if (n == 0 || count == 0) return idx;
  if (n <= count) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(count);
  for (std::size_t k = 0; k < count; ++k) idx.push_back(k * n / count);
  return idx;
}

double beam_end_log_weight(const PointCloud& query, const Pose2& pose, const LikelihoodField& field) {
  const auto& prm = field.params();
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double inv = 1.0 / (2.0 * prm.sigma_hit * prm.sigma_hit);
  double log_w = 0.0;
  for (const auto i : subsample_indices(query.size(), prm.sample_count)) {
    const Eigen::Vector3d& p = query[i];
    const Eigen::Vector3d q(pose.x + c * p.x() - s * p.y(), pose.y + s * p.x() + c * p.y(),
                            p.z() + prm.sensor_height);
    const double d = field.nearest_distance(q);
    log_w -= d * d * inv;
  }
  return log_w;
}

double beam_end_weight(const PointCloud& query, const Pose2& pose, const LikelihoodField& field) {
  return std::exp(beam_end_log_weight(query, pose, field));
}

std::size_t BeamEndModel::log_likelihoods(std::span<const Particle> particles,
                                          const Observation& obs, std::span<double> out) const {
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(particles.size()); ++k) {
    const auto& p = particles[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = beam_end_log_weight(obs.cloud, {p.x, p.y, p.theta}, field_);
  }
  return particles.size();
}

RangeHistogram range_histogram(const RangeImage& img, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("range_histogram: need at least two bins");
  RangeHistogram h;
  h.r_max = img.intrinsics().r_max;
  h.bins.assign(bins, 0.0);
  const double width = h.bin_width();
  std::size_t n = 0;
  for (const float r : img.ranges()) {
    if (r < 0.0f) continue;
    const auto b = std::min(bins - 1, static_cast<std::size_t>(static_cast<double>(r) / width));
    h.bins[b] += 1.0;
    ++n;
  }
  if (n == 0) {
    std::fill(h.bins.begin(), h.bins.end(), 1.0 / static_cast<double>(bins));
  } else {
    for (auto& v : h.bins) v /= static_cast<double>(n);
  }
  return h;
}

double wasserstein_1d(const RangeHistogram& a, const RangeHistogram& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wasserstein_1d: bin counts differ");
  if (a.r_max != b.r_max) throw std::invalid_argument("wasserstein_1d: bin ranges differ");
  double ca = 0.0;
  double cb = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a.bins[i];
    cb += b.bins[i];
    sum += std::abs(ca - cb);
  }
  return sum * a.bin_width();
}

double histogram_similarity(double distance, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("histogram_similarity: lambda must be > 0");
  return std::exp(-distance / lambda);
}

double histogram_weight(const RangeImage& query, const RangeImage& map_scan, double lambda,
                        std::size_t bins) {
  return histogram_similarity(
      wasserstein_1d(range_histogram(query, bins), range_histogram(map_scan, bins)), lambda);
}

HistogramModel::HistogramModel(const VirtualScanGrid& grid, HistogramModelParams params)
    : grid_(grid), params_(params) {
  if (!(params_.lambda > 0.0)) throw std::invalid_argument("HistogramModel: lambda must be > 0");
  for (const auto c : grid_.occupied_cells()) {
    cell_histograms_.emplace(c, range_histogram(grid_.scan(c), params_.bins));
  }
}

std::size_t HistogramModel::log_likelihoods(std::span<const Particle> particles,
                                            const Observation& obs, std::span<double> out) const {
  const RangeHistogram query = range_histogram(obs.image, params_.bins);
  std::unordered_map<std::size_t, double> memo;
  const double log_floor = std::log(params_.weight_floor);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const auto cell = grid_.lookup(particles[i].x, particles[i].y);
    if (!cell) {
      out[i] = log_floor;
      continue;
    }
    auto it = memo.find(*cell);
    if (it == memo.end()) {
      const double d = wasserstein_1d(query, cell_histograms_.at(*cell));
      it = memo.emplace(*cell, -d / params_.lambda).first;
    }
    out[i] = it->second;
  }
  return memo.size();
}

}  // namespace ovmcl
