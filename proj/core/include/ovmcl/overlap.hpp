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

#include <stdexcept>
#include <vector>

#include <Eigen/Geometry>

#include "ovmcl/scan_model.hpp"

namespace ovmcl {

inline constexpr double kDefaultRangeTolerance = 1.0;

class IntrinsicsMismatch : public std::invalid_argument {
 public:
  IntrinsicsMismatch() : std::invalid_argument("range images have different intrinsics") {}
};

/// Overlap fraction and relative heading between a query and a map scan.
///
/// A positive yaw_offset means the query frame is rotated counter-clockwise
/// (seen from +z) relative to the map scan. Because virtual scans face yaw 0,
/// against a map scan the offset is the absolute heading of the query.
struct OverlapEstimate {
  double overlap = 0.0;     // [0, 1]
  double yaw_offset = 0.0;  // degrees, [-180, 180)
};

/// Produces overlap and yaw for a (query, map scan) pair. Implementations must
/// be deterministic and safe to call concurrently.
class ObservationScorer {
 public:
  virtual ~ObservationScorer() = default;
  virtual OverlapEstimate score(const RangeImage& query, const RangeImage& map_scan) const = 0;
};

/// Fraction of valid pixels of `a` that, moved by `a_to_b` and re-projected
/// into `b`, land on a valid pixel of `b` with range within `eps_r`.
double ground_truth_overlap(const RangeImage& a, const RangeImage& b,
                            const Eigen::Isometry3d& a_to_b, double eps_r = kDefaultRangeTolerance);

/// Rotates image columns: column j of the result is column (j - k) mod W of `img`.
RangeImage circular_shift(const RangeImage& img, int k);

/// Yaw in degrees, wrapped to [-180, 180), of a column shift.
double shift_to_yaw(int k, int width);

/// Agreement after aligning query column (j + k) mod W with map column j,
/// normalized by the number of valid query pixels.
double shift_score(const RangeImage& query, const RangeImage& map_scan, int k,
                   double eps_r = kDefaultRangeTolerance);

/// Matching pixel counts for every shift k in [0, W). Entry k is the
/// numerator of shift_score(query, map_scan, k).
std::vector<int> shift_match_counts(const RangeImage& query, const RangeImage& map_scan,
                                    double eps_r = kDefaultRangeTolerance);

/// Exhaustive column-shift search over ranges. Stands in for a learned
/// overlap/yaw model.
class GeometricScorer final : public ObservationScorer {
 public:
  explicit GeometricScorer(double eps_r = kDefaultRangeTolerance);

  OverlapEstimate score(const RangeImage& query, const RangeImage& map_scan) const override;
  double range_tolerance() const { return eps_r_; }

 private:
  double eps_r_;
};

}  // namespace ovmcl
