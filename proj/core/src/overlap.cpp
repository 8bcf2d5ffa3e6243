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

#include "ovmcl/overlap.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "ovmcl/geometry.hpp"

namespace ovmcl {

namespace {

void require_same_intrinsics(const RangeImage& a, const RangeImage& b) {
  if (!(a.intrinsics() == b.intrinsics())) throw IntrinsicsMismatch();
}

int wrap_column(int c, int w) {
  const int m = c % w;
  return m < 0 ? m + w : m;
}

}  // namespace

double ground_truth_overlap(const RangeImage& a, const RangeImage& b,
                            const Eigen::Isometry3d& a_to_b, double eps_r) {
  if (!(eps_r > 0.0)) throw std::invalid_argument("ground_truth_overlap: eps_r must be > 0");
  std::size_t valid = 0;
  std::size_t hits = 0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (!a.valid(i, j)) continue;
      ++valid;
      const Eigen::Vector3d p = a_to_b * a.point(i, j);
      const auto px = project_point(p, b.intrinsics());
      if (!px || !b.valid(px->row, px->col)) continue;
      if (std::abs(p.norm() - static_cast<double>(b.range(px->row, px->col))) <= eps_r) ++hits;
    }
  }
  return valid == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(valid);
}

RangeImage circular_shift(const RangeImage& img, int k) {
  RangeImage out(img.intrinsics());
  const int w = img.cols();
  for (int i = 0; i < img.rows(); ++i) {
    for (int j = 0; j < w; ++j) {
      const int src = wrap_column(j - k, w);
      out.set_range(i, j, img.range(i, src));
      out.set_normal(i, j, img.normal(i, src));
    }
  }
  return out;
}

double shift_to_yaw(int k, int width) {
  return wrap_degrees(static_cast<double>(k) * 360.0 / static_cast<double>(width));
}

double shift_score(const RangeImage& query, const RangeImage& map_scan, int k, double eps_r) {
  require_same_intrinsics(query, map_scan);
  const int w = query.cols();
  if (k < 0 || k >= w) throw std::out_of_range("shift_score: shift outside [0, W)");
  const auto tol = static_cast<float>(eps_r);
  std::size_t valid = 0;
  std::size_t hits = 0;
  for (int i = 0; i < query.rows(); ++i) {
    for (int j = 0; j < w; ++j) {
      if (query.valid(i, j)) ++valid;
      const int qj = (j + k) % w;
      if (!query.valid(i, qj) || !map_scan.valid(i, j)) continue;
      if (std::fabs(query.range(i, qj) - map_scan.range(i, j)) <= tol) ++hits;
    }
  }
  return valid == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(valid);
}

std::vector<int> shift_match_counts(const RangeImage& query, const RangeImage& map_scan,
                                    double eps_r) {
  require_same_intrinsics(query, map_scan);
  const int h = query.rows();
  const int w = query.cols();
  const auto tol = static_cast<float>(eps_r);
  constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

  // Invalid pixels become NaN so the tolerance test alone rejects them. The
  // query row is laid out twice to turn the circular shift into an offset.
  std::vector<float> q2(static_cast<std::size_t>(2 * w));
  std::vector<float> m(static_cast<std::size_t>(w));
  std::vector<int> counts(static_cast<std::size_t>(w), 0);

  const auto qr = query.ranges();
  const auto mr = map_scan.ranges();
  for (int i = 0; i < h; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(w);
    for (int j = 0; j < w; ++j) {
      const float qv = qr[base + j];
      q2[j] = q2[j + w] = qv >= 0.0f ? qv : kNaN;
      const float mv = mr[base + j];
      m[j] = mv >= 0.0f ? mv : kNaN;
    }
    for (int k = 0; k < w; ++k) {
      const float* qs = q2.data() + k;
      int c = 0;
      for (int j = 0; j < w; ++j) c += std::fabs(qs[j] - m[j]) <= tol ? 1 : 0;
      counts[k] += c;
    }
  }
  return counts;
}

GeometricScorer::GeometricScorer(double eps_r) : eps_r_(eps_r) {
  if (!(eps_r > 0.0)) throw std::invalid_argument("GeometricScorer: eps_r must be > 0");
}

OverlapEstimate GeometricScorer::score(const RangeImage& query, const RangeImage& map_scan) const {
  const auto counts = shift_match_counts(query, map_scan, eps_r_);
  const std::size_t valid = query.valid_count();
  if (valid == 0) return {};

  const int w = query.cols();
  int best = 0;
  for (int k = 1; k < w; ++k) {
    if (counts[k] > counts[best] ||
        (counts[k] == counts[best] &&
         std::abs(shift_to_yaw(k, w)) < std::abs(shift_to_yaw(best, w)))) {
      best = k;
    }
  }
  return {static_cast<double>(counts[best]) / static_cast<double>(valid), shift_to_yaw(best, w)};
}

}  // namespace ovmcl
