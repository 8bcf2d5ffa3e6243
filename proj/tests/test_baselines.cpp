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

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "ovmcl/baselines.hpp"
#include "ovmcl/sim_world.hpp"
#include "test_support.hpp"
#include "transport_oracle.hpp"

namespace ovmcl {
namespace {

using testing::from_counts;
using testing::random_counts;
using testing::transport_oracle;

double brute_nearest(const PointCloud& pts, const Eigen::Vector3d& q, double cap) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, (p - q).norm());
  return std::min(best, cap);
}

double brute_log_weight(const PointCloud& query, const Pose2& pose, const PointCloud& map,
                        const LikelihoodFieldParams& prm) {
  const std::size_t n = query.size();
  const std::size_t m = std::min(n, prm.sample_count);
  double lw = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = n <= prm.sample_count ? k : k * n / prm.sample_count;
    const Eigen::Vector3d p = query[i];
    const Eigen::Vector3d q(pose.x + std::cos(pose.theta) * p.x() - std::sin(pose.theta) * p.y(),
                            pose.y + std::sin(pose.theta) * p.x() + std::cos(pose.theta) * p.y(),
                            p.z() + prm.sensor_height);
    const double d = brute_nearest(map, q, prm.max_distance);
    lw -= d * d / (2.0 * prm.sigma_hit * prm.sigma_hit);
  }
  return lw;
}

RangeHistogram random_histogram(std::size_t bins, double r_max, std::mt19937_64& rng) {
  RangeHistogram h;
  h.r_max = r_max;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution empty(0.3);
  double s = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    h.bins.push_back(empty(rng) ? 0.0 : u(rng));
    s += h.bins.back();
  }
  if (s == 0.0) {
    h.bins[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : h.bins) v /= s;
  return h;
}

PointCloud world_map_points(const WorldModel& world, const SensorIntrinsics& intr) {
  PointCloud map;
  for (const Pose2 p : {Pose2{0, 0, 0}, Pose2{-8, 4, 1}, Pose2{7, -5, -2}}) {
    const PointCloud local = unproject(simulate_scan(world, p, intr, 1.7));
    const Eigen::Isometry3d t = to_isometry(p, 1.7);
    for (const auto& q : local) map.push_back(t * q);
  }
  return map;
}

TEST(LikelihoodField, NearestDistanceMatchesBruteForce) {
  const auto world = testing::small_world();
  const LikelihoodField field(world_map_points(world, testing::small_intrinsics()));
  ASSERT_GT(field.points().size(), 1000u);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> xy(-40.0, 40.0);
  std::uniform_real_distribution<double> z(-3.0, 15.0);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d q(xy(rng), xy(rng), z(rng));
    EXPECT_NEAR(field.nearest_distance(q), brute_nearest(field.points(), q, 3.0), 1e-12);
  }
  // points sitting on the map
  for (std::size_t i = 0; i < field.points().size(); i += 97) {
    EXPECT_EQ(field.nearest_distance(field.points()[i]), 0.0);
  }
  EXPECT_EQ(field.nearest_distance({1e6, 0, 0}), 3.0);
}

TEST(LikelihoodField, VoxelDownSampling) {
  PointCloud pts{{0.01, 0.01, 0.01}, {0.05, 0.02, 0.03}, {0.15, 0.0, 0.0}, {-0.01, 0.0, 0.0}};
  const LikelihoodField field(pts);
  ASSERT_EQ(field.points().size(), 3u);
  EXPECT_EQ(field.points()[0], pts[0]);
  EXPECT_THROW(LikelihoodField(pts, LikelihoodFieldParams{0.0}), std::invalid_argument);
  LikelihoodFieldParams bad;
  bad.sigma_hit = 0.0;
  EXPECT_THROW(LikelihoodField(pts, bad), std::invalid_argument);
  EXPECT_EQ(LikelihoodField(PointCloud{}).nearest_distance({0, 0, 0}), 3.0);
}

TEST(SubsampleIndices, EvenStride) {
  EXPECT_EQ(subsample_indices(5, 10), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(subsample_indices(10, 5), (std::vector<std::size_t>{0, 2, 4, 6, 8}));
  EXPECT_TRUE(subsample_indices(0, 5).empty());
  const auto idx = subsample_indices(57600, 1000);
  ASSERT_EQ(idx.size(), 1000u);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
  EXPECT_LT(idx.back(), 57600u);
}

TEST(BeamEnd, MapPointsAtTheirOwnPoseWeighOne) {
  std::mt19937_64 rng(2);
  PointCloud map = testing::random_shell(3000, 2.0, 20.0, rng);
  for (auto& p : map) p.z() += 1.7;
  const LikelihoodField field(map);
  PointCloud query;
  for (const auto& p : field.points()) query.push_back(p - Eigen::Vector3d(0, 0, 1.7));
  EXPECT_EQ(beam_end_log_weight(query, {0, 0, 0}, field), 0.0);
  EXPECT_EQ(beam_end_weight(query, {0, 0, 0}, field), 1.0);
}

TEST(BeamEnd, FarPoseIsNegligible) {
  std::mt19937_64 rng(3);
  PointCloud map = testing::random_shell(3000, 2.0, 20.0, rng);
  const LikelihoodField field(map);
  const PointCloud query = testing::random_shell(5000, 2.0, 20.0, rng);
  const double lw = beam_end_log_weight(query, {500.0, 500.0, 0.0}, field);
  EXPECT_LE(lw, -12.5 * 1000);
  EXPECT_EQ(beam_end_weight(query, {500.0, 500.0, 0.0}, field), 0.0);
}

TEST(BeamEnd, MatchesBruteForceOracle) {
  const auto world = testing::small_world();
  const SensorIntrinsics intr = testing::small_intrinsics();
  const LikelihoodField field(world_map_points(world, intr));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> xy(-10.0, 10.0);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  const PointCloud query = unproject(simulate_scan(world, {1.0, 2.0, 0.5}, desk_intrinsics(), 1.7));
  ASSERT_GT(query.size(), 1000u);
  for (int trial = 0; trial < 10; ++trial) {
    const Pose2 pose{xy(rng), xy(rng), th(rng)};
    EXPECT_NEAR(beam_end_log_weight(query, pose, field),
                brute_log_weight(query, pose, field.points(), field.params()), 1e-9);
  }
}

TEST(BeamEnd, InvariantToMapOrderAndDuplicates) {
  const auto world = testing::small_world();
  const LikelihoodField base(world_map_points(world, testing::small_intrinsics()));
  PointCloud shuffled = base.points();
  std::mt19937_64 rng(5);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t n = shuffled.size();
  for (std::size_t i = 0; i < n; i += 3) shuffled.push_back(shuffled[i]);
  const LikelihoodField other(shuffled);
  EXPECT_EQ(other.points().size(), base.points().size());
  const PointCloud query = unproject(simulate_scan(world, {0.0, 0.0, 0.0}, testing::small_intrinsics(), 1.7));
  for (const Pose2 pose : {Pose2{0, 0, 0}, Pose2{1.5, -2.0, 0.4}, Pose2{-6, 3, 2.5}}) {
    EXPECT_EQ(beam_end_log_weight(query, pose, base), beam_end_log_weight(query, pose, other));
  }
}

TEST(BeamEndModel, OneEvaluationPerParticle) {
  const auto world = testing::small_world();
  const LikelihoodField field(world_map_points(world, testing::small_intrinsics()));
  const BeamEndModel model(field);
  const RangeImage img = simulate_scan(world, {}, testing::small_intrinsics(), 1.7);
  const PointCloud cloud = unproject(img);
  std::vector<Particle> particles{{0, 0, 0, 1}, {1, 1, 1, 1}, {0, 0, 0, 1}};
  std::vector<double> out(3);
  EXPECT_EQ(model.log_likelihoods(particles, {img, cloud}, out), 3u);
  EXPECT_EQ(out[0], out[2]);
  EXPECT_EQ(out[0], beam_end_log_weight(cloud, {0, 0, 0}, field));
  EXPECT_GT(out[0], out[1]);
  EXPECT_EQ(model.name(), "beamend");
}

TEST(RangeHistogram, KnownCases) {
  const SensorIntrinsics intr = testing::small_intrinsics();
  RangeImage img(intr);
  for (int j = 0; j < intr.width; ++j) img.set_range(3, j, 12.3f);
  const RangeHistogram h = range_histogram(img, 10);
  EXPECT_DOUBLE_EQ(h.bin_width(), 7.5);
  for (std::size_t b = 0; b < 10; ++b) EXPECT_EQ(h.bins[b], b == 1 ? 1.0 : 0.0);

  const RangeHistogram u = range_histogram(RangeImage(intr), 8);
  for (const double v : u.bins) EXPECT_EQ(v, 1.0 / 8);

  RangeImage edge(intr);
  edge.set_range(0, 0, static_cast<float>(intr.r_max));
  EXPECT_EQ(range_histogram(edge, 5).bins[4], 1.0);
  EXPECT_THROW(range_histogram(img, 1), std::invalid_argument);
}

TEST(RangeHistogram, MatchesLoopOracle) {
  std::mt19937_64 rng(6);
  const SensorIntrinsics intr = desk_intrinsics();
  for (int trial = 0; trial < 20; ++trial) {
    const RangeImage img = testing::random_image(intr, 0.7, intr.r_min, intr.r_max, rng);
    const std::size_t bins = 2 + static_cast<std::size_t>(trial * 7);
    std::vector<double> counts(bins, 0.0);
    double valid = 0.0;
    for (int i = 0; i < intr.height; ++i) {
      for (int j = 0; j < intr.width; ++j) {
        const double r = img.range(i, j);
        if (r < 0.0) continue;
        std::size_t b = 0;
        while (b + 1 < bins && r >= (b + 1) * intr.r_max / bins) ++b;
        counts[b] += 1.0;
        valid += 1.0;
      }
    }
    const RangeHistogram h = range_histogram(img, bins);
    double sum = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      EXPECT_NEAR(h.bins[b], counts[b] / valid, 1e-15);
      sum += h.bins[b];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Wasserstein, KnownCases) {
  RangeHistogram a;
  a.r_max = 10.0;
  a.bins = {1, 0, 0, 0, 0};
  EXPECT_EQ(wasserstein_1d(a, a), 0.0);
  for (std::size_t k = 0; k < 5; ++k) {
    RangeHistogram b = a;
    b.bins = {0, 0, 0, 0, 0};
    b.bins[k] = 1.0;
    EXPECT_DOUBLE_EQ(wasserstein_1d(a, b), k * 2.0);
  }
  RangeHistogram c = a;
  c.bins = {1, 0, 0, 0};
  EXPECT_THROW(wasserstein_1d(a, c), std::invalid_argument);
  RangeHistogram d = a;
  d.r_max = 20.0;
  EXPECT_THROW(wasserstein_1d(a, d), std::invalid_argument);
}

TEST(Wasserstein, MatchesTransportOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> bins(2, 16);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t b = bins(rng);
    const int mass = 1000;
    const auto c1 = random_counts(b, mass, rng);
    const auto c2 = random_counts(b, mass, rng);
    const RangeHistogram h1 = from_counts(c1, 75.0);
    const RangeHistogram h2 = from_counts(c2, 75.0);
    const double expected = static_cast<double>(transport_oracle(c1, c2)) / mass * h1.bin_width();
    EXPECT_NEAR(wasserstein_1d(h1, h2), expected, 1e-9);
  }
}

TEST(Wasserstein, IsAMetric) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const RangeHistogram a = random_histogram(12, 75.0, rng);
    const RangeHistogram b = random_histogram(12, 75.0, rng);
    const RangeHistogram c = random_histogram(12, 75.0, rng);
    const double ab = wasserstein_1d(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, wasserstein_1d(b, a), 1e-12);
    EXPECT_LT(wasserstein_1d(a, a), 1e-12);
    EXPECT_LE(wasserstein_1d(a, c), ab + wasserstein_1d(b, c) + 1e-12);
  }
}

TEST(HistogramWeight, Definition) {
  const auto world = testing::small_world();
  const RangeImage img = simulate_scan(world, {}, testing::small_intrinsics(), 1.7);
  EXPECT_EQ(histogram_weight(img, img), 1.0);
  EXPECT_NEAR(histogram_similarity(5.0, 5.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(histogram_similarity(5.0, 5.0), 0.36787944117144233, 1e-15);
  double prev = 1.0;
  for (double d = 0.5; d < 50.0; d += 0.5) {
    const double w = histogram_similarity(d, 5.0);
    EXPECT_GT(w, 0.0);
    EXPECT_LT(w, prev);
    prev = w;
  }
  EXPECT_THROW(histogram_similarity(1.0, 0.0), std::invalid_argument);
}

TEST(HistogramWeight, NearerPlaceScoresHigher) {
  const auto world = make_desk_world(1);
  const SensorIntrinsics intr = desk_intrinsics();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> along(40.0, 160.0);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  int wins = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // on a road, compare a map place 1 m away with one 15 m away
    const double x = along(rng);
    const double heading = th(rng);
    const RangeImage query = simulate_scan(world, {x, 100.0, heading}, intr, 1.7);
    const RangeImage near = simulate_scan(world, {x + 1.0, 100.0, 0.0}, intr, 1.7);
    const RangeImage far = simulate_scan(world, {x + 15.0, 100.0, 0.0}, intr, 1.7);
    if (histogram_weight(query, near) > histogram_weight(query, far)) ++wins;
  }
  EXPECT_GE(wins, 9);
}

TEST(HistogramModel, MemoizedPerCell) {
  GridGeometry g;
  g.nx = 3;
  g.ny = 1;
  const SensorIntrinsics intr = testing::small_intrinsics();
  VirtualScanGrid grid(g, intr, 1.7);
  std::mt19937_64 rng(10);
  grid.set_scan(0, testing::random_image(intr, 0.8, 1.0, 20.0, rng));
  grid.set_scan(1, testing::random_image(intr, 0.8, 30.0, 70.0, rng));
  const HistogramModel model(grid);
  const RangeImage query = testing::random_image(intr, 0.8, 1.0, 20.0, rng);
  const PointCloud none;
  const std::vector<Particle> particles{{0.2, 0.5, 0, 1}, {0.7, 0.1, 2, 1}, {1.5, 0.5, 0, 1},
                                        {2.5, 0.5, 0, 1}, {-1, 0, 0, 1}};
  std::vector<double> out(particles.size());
  EXPECT_EQ(model.log_likelihoods(particles, {query, none}, out), 2u);
  EXPECT_EQ(out[0], out[1]);
  EXPECT_NEAR(out[0], std::log(histogram_weight(query, grid.scan(std::size_t{0}))), 1e-12);
  EXPECT_NEAR(out[2], std::log(histogram_weight(query, grid.scan(std::size_t{1}))), 1e-12);
  EXPECT_GT(out[0], out[2]);
  EXPECT_EQ(out[3], std::log(1e-6));
  EXPECT_EQ(out[4], std::log(1e-6));
}

}  // namespace
}  // namespace ovmcl
