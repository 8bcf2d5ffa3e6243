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

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ovmcl/baselines.hpp"
#include "ovmcl/eval.hpp"
#include "ovmcl/grid_io.hpp"
#include "ovmcl/map_builder.hpp"
#include "ovmcl/overlap.hpp"
#include "ovmcl/scan_io.hpp"
#include "ovmcl/sim_world.hpp"

namespace fs = std::filesystem;
using namespace ovmcl;

namespace {

SensorIntrinsics profile_intrinsics(const std::string& name) {
  if (name == "desk") return desk_intrinsics();
  if (name == "hdl64") return SensorIntrinsics{};
  throw CLI::ValidationError("--profile", "unknown profile " + name);
}

// Aggregated map points live next to the grid for the beam-end model.
fs::path cloud_path_for(const fs::path& map) {
  fs::path p = map;
  p += ".cloud.bin";
  return p;
}

std::vector<PointCloud> read_scans(const fs::path& dir, std::size_t max_frames) {
  auto files = list_scan_files(dir);
  if (files.empty()) throw std::runtime_error("no *.bin scans in " + dir.string());
  if (max_frames > 0 && files.size() > max_frames) files.resize(max_frames);
  std::vector<PointCloud> scans;
  scans.reserve(files.size());
  for (const auto& f : files) scans.push_back(read_point_cloud(f));
  return scans;
}

QuerySequence load_sequence(const fs::path& scans_dir, const fs::path& odometry_file,
                            const SensorIntrinsics& intr, std::size_t max_frames) {
  auto scans = read_scans(scans_dir, max_frames);
  const auto records = read_odometry(odometry_file);
  if (records.size() < scans.size()) {
    throw std::runtime_error("odometry has fewer lines than there are scans");
  }
  std::vector<OdometryControl> controls;
  std::vector<double> stamps;
  for (std::size_t t = 0; t < scans.size(); ++t) {
    controls.push_back(records[t].control);
    stamps.push_back(records[t].timestamp);
  }
  QuerySequence seq = make_query_sequence(std::move(scans), std::move(controls), intr);
  seq.timestamps = std::move(stamps);
  return seq;
}

// Observation models over one map, built on demand.
class ModelSet {
 public:
  ModelSet(const fs::path& map_path, VirtualScanGrid grid, double eps_r)
      : map_path_(map_path), grid_(std::move(grid)), scorer_(eps_r) {}

  const VirtualScanGrid& grid() const { return grid_; }

  const ObservationModel& get(const std::string& name) {
    if (name == "overlap") {
      if (!overlap_) overlap_ = std::make_unique<OverlapModel>(grid_, scorer_);
      return *overlap_;
    }
    if (name == "histogram") {
      if (!histogram_) histogram_ = std::make_unique<HistogramModel>(grid_);
      return *histogram_;
    }
    if (name == "beamend") {
      if (!beamend_) {
        const fs::path cloud = cloud_path_for(map_path_);
        if (!fs::exists(cloud)) throw std::runtime_error("beamend needs the map cloud " + cloud.string());
        LikelihoodFieldParams p;
        p.sensor_height = grid_.sensor_height();
        field_ = std::make_unique<LikelihoodField>(read_point_cloud(cloud), p);
        beamend_ = std::make_unique<BeamEndModel>(*field_);
      }
      return *beamend_;
    }
    throw std::invalid_argument("unknown model " + name);
  }

 private:
  fs::path map_path_;
  VirtualScanGrid grid_;
  GeometricScorer scorer_;
  std::unique_ptr<OverlapModel> overlap_;
  std::unique_ptr<HistogramModel> histogram_;
  std::unique_ptr<LikelihoodField> field_;
  std::unique_ptr<BeamEndModel> beamend_;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::uint64_t world_seed = 1;
  std::uint64_t traj_seed = 1;
  std::uint64_t perturb_seed = 7;
  double perturb_fraction = 0.2;
  double step = 2.0;
  std::string profile = "desk";
  fs::path out;
};

int run_simulate(const SimulateArgs& a) {
  const WorldModel world = make_desk_world(a.world_seed);
  const WorldModel changed = perturb_world(world, a.perturb_seed, a.perturb_fraction);
  const SensorIntrinsics intr = profile_intrinsics(a.profile);
  const DeskLayout layout = desk_layout();
  fs::create_directories(a.out);
  save_world(a.out / "world.txt", world);
  save_world(a.out / "world_query.txt", changed);

  TrajectorySpec map_traj;
  map_traj.waypoints = layout.map_route;
  map_traj.step_length = a.step;
  map_traj.seed = a.traj_seed;
  write_dataset(a.out / "map", generate_dataset(world, map_traj, intr, 1.7));

  TrajectorySpec query_traj = map_traj;
  query_traj.waypoints = layout.query_route;
  query_traj.seed = a.traj_seed + 1;
  const Dataset query = generate_dataset(changed, query_traj, intr, 1.7);
  write_dataset(a.out / "query", query);
  std::cout << "wrote " << query.scans.size() << " query scans to " << (a.out / "query").string() << '\n';
  return 0;
}

struct BuildMapArgs {
  fs::path scans;
  fs::path poses;
  fs::path out;
  double resolution = 1.0;
  double voxel = 0.1;
  double corridor = 0.0;
  double margin = 10.0;
  std::vector<double> bounds;
  std::string profile = "desk";
  std::size_t min_valid = 100;
};

int run_build_map(const BuildMapArgs& a) {
  const auto scans = read_scans(a.scans, 0);
  const PoseList poses = read_poses(a.poses);
  if (poses.size() != scans.size()) throw std::runtime_error("pose count differs from scan count");
  const AggregatedCloud cloud = aggregate(scans, poses, a.voxel);

  GridOptions opts;
  opts.resolution = a.resolution;
  opts.intrinsics = profile_intrinsics(a.profile);
  opts.sensor_height = poses.front().translation().z();
  opts.min_valid_pixels = a.min_valid;
  opts.corridor_radius = a.corridor;
  if (a.bounds.size() == 4) {
    opts.bounds_min = {a.bounds[0], a.bounds[1]};
    opts.bounds_max = {a.bounds[2], a.bounds[3]};
  } else {
    Eigen::Vector2d lo = cloud.viewpoints.front();
    Eigen::Vector2d hi = lo;
    for (const auto& v : cloud.viewpoints) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    opts.bounds_min = lo.array() - a.margin;
    opts.bounds_max = hi.array() + a.margin;
  }
  GridBuildReport report;
  const VirtualScanGrid grid = build_grid(cloud, opts, &report);
  save_grid(grid, a.out);
  write_point_cloud(cloud_path_for(a.out), cloud.points);
  std::cout << "cells " << report.cells_total << " rendered " << report.cells_attempted << " occupied "
            << report.cells_occupied << '\n';
  return 0;
}

struct LocalizeArgs {
  fs::path map;
  fs::path scans;
  fs::path odometry;
  fs::path out;
  std::string model = "overlap";
  std::size_t particles = 10000;
  std::uint64_t seed = 0;
  std::size_t max_frames = 0;
  double eps_r = kDefaultRangeTolerance;
};

int run_localize(const LocalizeArgs& a) {
  ModelSet models(a.map, load_grid(a.map), a.eps_r);
  const QuerySequence seq = load_sequence(a.scans, a.odometry, models.grid().intrinsics(), a.max_frames);
  RunOptions opts;
  opts.particles = a.particles;
  opts.seed = a.seed;
  const RunResult run = run_localization(models.grid(), models.get(a.model), seq, opts);
  write_trajectory(a.out, run);
  return 0;
}

struct EvaluateArgs {
  fs::path map;
  fs::path dataset;
  fs::path out;
  std::string models = "overlap,beamend,histogram";
  std::string particles = "500,1000,5000";
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::size_t max_frames = 0;
  std::size_t check_interval = 100;
  double success_radius = 5.0;
  bool stop_on_failure = false;
  double eps_r = kDefaultRangeTolerance;
};

int run_evaluate(const EvaluateArgs& a) {
  ModelSet models(a.map, load_grid(a.map), a.eps_r);
  QuerySequence seq = load_sequence(a.dataset / "scans", a.dataset / "odometry.txt",
                                    models.grid().intrinsics(), a.max_frames);
  const PoseList poses = read_poses(a.dataset / "poses.txt");
  if (poses.size() < seq.images.size()) throw std::runtime_error("dataset has fewer poses than scans");
  for (std::size_t t = 0; t < seq.images.size(); ++t) seq.truths.push_back(to_pose2(poses[t]));

  EvalConfig cfg;
  cfg.runs = a.runs;
  cfg.check_interval = a.check_interval;
  cfg.success_radius = a.success_radius;

  fs::create_directories(a.out / "runs");
  std::ofstream log(a.out / "runs.log");
  std::ofstream evals(a.out / "evaluations.csv");
  evals << "model,particles,step,mean_evaluations,max_evaluations\n";
  std::vector<SetupSummary> rows;
  for (const auto& name : split(a.models)) {
    const ObservationModel& model = models.get(name);
    for (const auto& n_text : split(a.particles)) {
      const std::size_t n = std::stoul(n_text);
      std::vector<RunResult> runs;
      for (std::size_t r = 0; r < a.runs; ++r) {
        RunOptions opts;
        opts.particles = n;
        opts.seed = a.seed + r;
        opts.judge = cfg;
        opts.stop_on_failure = a.stop_on_failure;
        RunResult run = run_localization(models.grid(), model, seq, opts);
        const std::string stem = name + "_n" + std::to_string(n) + "_run" + std::to_string(r);
        write_trajectory(a.out / "runs" / (stem + ".txt"), run);

        const auto t_conv = convergence_step(run);
        const bool ok = judge_success(run, cfg);
        log << stem << " steps " << run.size() << (run.complete ? "" : " (stopped)") << " converged_at "
            << (t_conv ? std::to_string(*t_conv) : std::string("never")) << " success " << (ok ? 1 : 0);
        if (ok) {
          const auto m = rmse_metrics(run);
          log << " location_rmse " << m.location << " yaw_rmse " << m.yaw;
        }
        log << '\n';
        runs.push_back(std::move(run));
      }
      const auto report = evaluation_count_report(runs);
      for (std::size_t t = 0; t < report.mean_per_step.size(); ++t) {
        evals << name << ',' << n << ',' << t << ',' << report.mean_per_step[t] << ','
              << report.max_per_step[t] << '\n';
      }
      rows.push_back(summarize(name, n, runs, cfg));
      std::cout << name << " N=" << n << " success " << rows.back().success_rate() << '\n';
    }
  }
  std::ofstream table(a.out / "summary.txt");
  write_summary_table(table, rows);
  std::ofstream csv(a.out / "summary.csv");
  write_summary_csv(csv, rows);
  write_summary_table(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo localization on LiDAR range images"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic world with map and query sequences");
  simulate->add_option("--world-seed", sim.world_seed);
  simulate->add_option("--traj-seed", sim.traj_seed);
  simulate->add_option("--perturb-seed", sim.perturb_seed);
  simulate->add_option("--perturb", sim.perturb_fraction, "Fraction of parked cars changed for the query run")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--step", sim.step, "Meters between scans")->check(CLI::PositiveNumber);
  simulate->add_option("--profile", sim.profile, "desk (32x180) or hdl64 (64x900)");
  simulate->add_option("--out", sim.out)->required();

  BuildMapArgs bm;
  auto* build = app.add_subcommand("build-map", "Render the virtual scan grid from mapping scans");
  build->add_option("--scans", bm.scans)->required()->check(CLI::ExistingDirectory);
  build->add_option("--poses", bm.poses)->required()->check(CLI::ExistingFile);
  build->add_option("--resolution", bm.resolution)->check(CLI::PositiveNumber);
  build->add_option("--out", bm.out)->required();
  build->add_option("--voxel", bm.voxel, "Aggregation voxel edge")->check(CLI::PositiveNumber);
  build->add_option("--corridor", bm.corridor, "Only render cells this close to the mapping path (0 = all)");
  build->add_option("--margin", bm.margin, "Padding around the mapping path when --bounds is absent");
  build->add_option("--bounds", bm.bounds, "xmin ymin xmax ymax")->expected(4);
  build->add_option("--profile", bm.profile);
  build->add_option("--min-valid", bm.min_valid);

  LocalizeArgs loc;
  auto* localize = app.add_subcommand("localize", "Global localization on a scan sequence");
  localize->add_option("--map", loc.map)->required()->check(CLI::ExistingFile);
  localize->add_option("--scans", loc.scans)->required()->check(CLI::ExistingDirectory);
  localize->add_option("--odometry", loc.odometry)->required()->check(CLI::ExistingFile);
  localize->add_option("--particles", loc.particles)->check(CLI::PositiveNumber);
  localize->add_option("--seed", loc.seed);
  localize->add_option("--out", loc.out)->required();
  localize->add_option("--model", loc.model)->check(CLI::IsMember({"overlap", "beamend", "histogram"}));
  localize->add_option("--max-frames", loc.max_frames, "Use only the first N scans (0 = all)");
  localize->add_option("--eps-r", loc.eps_r, "Range tolerance of the overlap scorer");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Repeated runs per model and particle count");
  evaluate->add_option("--map", ev.map)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--dataset", ev.dataset, "Directory with scans/, poses.txt, odometry.txt")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--models", ev.models);
  evaluate->add_option("--particles", ev.particles);
  evaluate->add_option("--runs", ev.runs)->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", ev.seed, "Seed of the first run; run r uses seed + r");
  evaluate->add_option("--out", ev.out)->required();
  evaluate->add_option("--max-frames", ev.max_frames);
  evaluate->add_option("--check-interval", ev.check_interval)->check(CLI::PositiveNumber);
  evaluate->add_option("--success-radius", ev.success_radius)->check(CLI::PositiveNumber);
  evaluate->add_flag("--stop-on-failure", ev.stop_on_failure, "End a run at its first failed checkpoint");
  evaluate->add_option("--eps-r", ev.eps_r);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim);
    if (*build) return run_build_map(bm);
    if (*localize) return run_localize(loc);
    if (*evaluate) return run_evaluate(ev);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
