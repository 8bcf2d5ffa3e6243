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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ovmcl/geometry.hpp"
#include "ovmcl/map_builder.hpp"
#include "ovmcl/mcl.hpp"
#include "ovmcl/scan_model.hpp"

namespace ovmcl {

/// Per-step record of one localization run.
struct RunResult {
  std::vector<double> timestamps;
  std::vector<Pose2> estimates;
  std::vector<Pose2> truths;  // empty when ground truth is unknown
  std::vector<bool> converged;
  std::vector<double> ess;
  std::vector<std::size_t> evaluations;
  std::vector<double> step_seconds;
  /// False when the run was cut short after a failed checkpoint.
  bool complete = true;

  std::size_t size() const { return estimates.size(); }
  /// Throws std::logic_error when the per-step sequences disagree in length.
  void validate() const;
};

struct EvalConfig {
  std::vector<std::size_t> particle_counts{500, 1000, 5000, 10000};
  std::size_t runs = 10;
  double success_radius = 5.0;     // meters
  std::size_t check_interval = 100;  // frames between checkpoints
  double convergence_std = 5.0;    // filter spread that counts as converged
};

/// First step at which the filter reported convergence.
std::optional<std::size_t> convergence_step(const RunResult& run);

/// Converged at some step, and at that step and every check_interval frames
/// after it the location error is below success_radius.
bool judge_success(const RunResult& run, const EvalConfig& cfg);

/// Fraction of successful runs. Throws std::invalid_argument for no runs.
double success_rate(std::span<const RunResult> runs, const EvalConfig& cfg);

struct RmseMetrics {
  double location = 0.0;  // meters
  double yaw = 0.0;       // degrees
};

/// RMSE over steps [from, end). Yaw residuals are wrapped to [-180, 180).
RmseMetrics rmse_metrics(const RunResult& run, std::size_t from);
/// RMSE from the convergence step on. Throws std::logic_error if never converged.
RmseMetrics rmse_metrics(const RunResult& run);

struct EvaluationCountReport {
  std::vector<double> mean_per_step;  // across runs, runs shorter than a step are skipped
  std::vector<std::size_t> max_per_step;
  double overall_mean = 0.0;
  std::size_t overall_max = 0;
};

/// Per-step evaluation statistics. With `bound` set, throws std::logic_error
/// if any step exceeds it (the overlap model can never score more cells than
/// the grid has).
EvaluationCountReport evaluation_count_report(std::span<const RunResult> runs,
                                              std::optional<std::size_t> bound = std::nullopt);

/// A localization input sequence with query images already projected.
struct QuerySequence {
  std::vector<double> timestamps;
  std::vector<PointCloud> clouds;
  std::vector<RangeImage> images;
  std::vector<OdometryControl> odometry;
  std::vector<Pose2> truths;  // optional
};

/// Projects every cloud with the grid intrinsics and estimates normals.
QuerySequence make_query_sequence(std::vector<PointCloud> clouds,
                                  std::vector<OdometryControl> odometry,
                                  const SensorIntrinsics& intr);

struct RunOptions {
  std::size_t particles = 1000;
  std::uint64_t seed = 0;
  MclParams mcl;
  /// Stop as soon as a checkpoint fails (needs truths). The outcome of
  /// judge_success is unchanged by stopping.
  bool stop_on_failure = false;
  EvalConfig judge;
};

/// Global localization over a query sequence.
RunResult run_localization(const VirtualScanGrid& grid, const ObservationModel& model,
                           const QuerySequence& seq, const RunOptions& opts);

/// "timestamp x y theta converged ess evaluations", one line per step.
void write_trajectory(std::ostream& out, const RunResult& run);
void write_trajectory(const std::filesystem::path& path, const RunResult& run);

struct SetupSummary {
  std::string model;
  std::size_t particles = 0;
  std::size_t runs = 0;
  std::size_t successes = 0;
  double location_rmse_mean = 0.0;
  double location_rmse_std = 0.0;
  double yaw_rmse_mean = 0.0;
  double yaw_rmse_std = 0.0;
  double mean_evaluations = 0.0;
  double mean_step_seconds = 0.0;

  double success_rate() const {
    return runs == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(runs);
  }
};

SetupSummary summarize(const std::string& model, std::size_t particles,
                       std::span<const RunResult> runs, const EvalConfig& cfg);

void write_summary_table(std::ostream& out, std::span<const SetupSummary> rows);
void write_summary_csv(std::ostream& out, std::span<const SetupSummary> rows);

}  // namespace ovmcl
