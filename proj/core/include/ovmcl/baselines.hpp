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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "ovmcl/geometry.hpp"
#include "ovmcl/map_builder.hpp"
#include "ovmcl/mcl.hpp"
#include "ovmcl/scan_model.hpp"

namespace ovmcl {

// ---------------------------------------------------------------------------
// Beam-end (likelihood field) model

struct LikelihoodFieldParams {
  double voxel_size = 0.1;      // map down-sampling
  double sigma_hit = 0.5;       // meters
  std::size_t sample_count = 1000;
  double sensor_height = 1.7;
  /// Nearest-neighbor distances are clamped here; must be >= 5 sigma_hit so
  /// that far-off endpoints are still numerically negligible.
  double max_distance = 3.0;
  double index_cell = 0.5;      // spatial hash cell edge
};

/// Voxel-down-sampled map with exact nearest-neighbor queries.
class LikelihoodField {
 public:
  LikelihoodField(const PointCloud& map_points, const LikelihoodFieldParams& params = {});

  const LikelihoodFieldParams& params() const { return params_; }
  const PointCloud& points() const { return points_; }

  /// Exact distance to the nearest map point, clamped to max_distance.
  double nearest_distance(const Eigen::Vector3d& q) const;

 private:
  LikelihoodFieldParams params_;
  PointCloud points_;
  // Dense cell index over the padded map bounds: CSR point lists plus a mask
  // of cells that have a map point within reach of the distance cap.
  Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
  std::array<int, 3> dims_{0, 0, 0};
  int max_ring_ = 0;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_points_;
  std::vector<std::uint8_t> near_;
};

/// Evenly strided subset of at most `count` indices out of `n`.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t count);

/// sum_k -d_k^2 / (2 sigma^2) over the subsampled endpoints moved to `pose`.
double beam_end_log_weight(const PointCloud& query, const Pose2& pose, const LikelihoodField& field);
double beam_end_weight(const PointCloud& query, const Pose2& pose, const LikelihoodField& field);

class BeamEndModel final : public ObservationModel {
 public:
  explicit BeamEndModel(const LikelihoodField& field) : field_(field) {}

  std::string_view name() const override { return "beamend"; }
  /// One evaluation per particle.
  std::size_t log_likelihoods(std::span<const Particle> particles, const Observation& obs,
                              std::span<double> out) const override;

 private:
  const LikelihoodField& field_;
};

// ---------------------------------------------------------------------------
// Range histogram model

/// Normalized histogram of ranges over [0, r_max] in equal bins.
struct RangeHistogram {
  std::vector<double> bins;
  double r_max = 0.0;

  std::size_t size() const { return bins.size(); }
  double bin_width() const { return r_max / static_cast<double>(bins.size()); }
};

/// No valid range gives the uniform histogram.
RangeHistogram range_histogram(const RangeImage& img, std::size_t bins = 100);

/// W1 between two histograms on the same bins: sum_b |CDF1(b) - CDF2(b)| * width.
double wasserstein_1d(const RangeHistogram& a, const RangeHistogram& b);

/// exp(-d / lambda).
double histogram_similarity(double distance, double lambda);

double histogram_weight(const RangeImage& query, const RangeImage& map_scan, double lambda = 5.0,
                        std::size_t bins = 100);

struct HistogramModelParams {
  std::size_t bins = 100;
  double lambda = 5.0;
  double weight_floor = 1e-6;
};

/// Histogram similarity against the virtual scan of the particle's cell.
/// Carries no heading information.
class HistogramModel final : public ObservationModel {
 public:
  HistogramModel(const VirtualScanGrid& grid, HistogramModelParams params = {});

  std::string_view name() const override { return "histogram"; }
  std::size_t log_likelihoods(std::span<const Particle> particles, const Observation& obs,
                              std::span<double> out) const override;

 private:
  const VirtualScanGrid& grid_;
  HistogramModelParams params_;
  std::unordered_map<std::size_t, RangeHistogram> cell_histograms_;
};

}  // namespace ovmcl
