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

#include <benchmark/benchmark.h>

#include <random>

#include "ovmcl/baselines.hpp"
#include "ovmcl/map_builder.hpp"
#include "ovmcl/mcl.hpp"
#include "ovmcl/overlap.hpp"
#include "ovmcl/sim_world.hpp"

namespace {

using namespace ovmcl;

// Map cloud of a short street stretch, shared by the benchmarks below.
const AggregatedCloud& street_cloud() {
  static const AggregatedCloud cloud = [] {
    const WorldModel world = make_desk_world(1);
    TrajectorySpec traj;
    traj.waypoints = {{30.0, 30.0}, {90.0, 30.0}};
    traj.step_length = 2.0;
    const Dataset ds = generate_dataset(world, traj, desk_intrinsics(), 1.7);
    PoseList poses;
    for (const auto& p : ds.poses) poses.push_back(to_isometry(p, 1.7));
    return aggregate(ds.scans, poses, 0.1);
  }();
  return cloud;
}

SensorIntrinsics profile(int64_t which) { return which == 0 ? desk_intrinsics() : SensorIntrinsics{}; }

void BM_SimulateScan(benchmark::State& state) {
  const WorldModel world = make_desk_world(1);
  const SensorIntrinsics intr = profile(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_scan(world, {60.0, 30.0, 0.4}, intr, 1.7));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(intr.pixel_count()));
}
BENCHMARK(BM_SimulateScan)->Arg(0)->Arg(1);

void BM_SphericalProject(benchmark::State& state) {
  const WorldModel world = make_desk_world(1);
  const SensorIntrinsics intr = profile(state.range(0));
  const PointCloud cloud = unproject(simulate_scan(world, {60.0, 30.0, 0.4}, intr, 1.7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_normals(spherical_project(cloud, intr)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cloud.size()));
}
BENCHMARK(BM_SphericalProject)->Arg(0)->Arg(1);

void BM_ShiftMatchCounts(benchmark::State& state) {
  const WorldModel world = make_desk_world(1);
  const SensorIntrinsics intr = profile(state.range(0));
  const RangeImage a = simulate_scan(world, {60.0, 30.0, 0.4}, intr, 1.7);
  const RangeImage b = simulate_scan(world, {61.0, 30.5, 0.0}, intr, 1.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(shift_match_counts(a, b));
  }
}
BENCHMARK(BM_ShiftMatchCounts)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_RenderVirtualScan(benchmark::State& state) {
  const AggregatedCloud& cloud = street_cloud();
  const SensorIntrinsics intr = desk_intrinsics();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_virtual_scan(cloud, 60.0, 30.0, intr, 1.7));
  }
  state.counters["points"] = static_cast<double>(cloud.points.size());
}
BENCHMARK(BM_RenderVirtualScan)->Unit(benchmark::kMillisecond);

void BM_NearestDistance(benchmark::State& state) {
  const LikelihoodField field(street_cloud().points);
  Rng rng(3);
  std::uniform_real_distribution<double> x(20.0, 100.0);
  std::uniform_real_distribution<double> y(20.0, 40.0);
  std::uniform_real_distribution<double> z(0.0, 8.0);
  std::vector<Eigen::Vector3d> queries(4096);
  for (auto& q : queries) q = {x(rng), y(rng), z(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(field.nearest_distance(queries[i++ & 4095]));
  }
}
BENCHMARK(BM_NearestDistance);

void BM_HistogramWeight(benchmark::State& state) {
  const WorldModel world = make_desk_world(1);
  const SensorIntrinsics intr = desk_intrinsics();
  const RangeImage a = simulate_scan(world, {60.0, 30.0, 0.4}, intr, 1.7);
  const RangeImage b = simulate_scan(world, {70.0, 30.0, 0.0}, intr, 1.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(histogram_weight(a, b));
  }
}
BENCHMARK(BM_HistogramWeight)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
