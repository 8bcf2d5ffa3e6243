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
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "ovmcl/geometry.hpp"
#include "ovmcl/map_builder.hpp"
#include "ovmcl/overlap.hpp"
#include "ovmcl/scan_model.hpp"

namespace ovmcl {

using Rng = std::mt19937_64;

struct Particle {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, [-pi, pi)
  double weight = 0.0;

  bool operator==(const Particle&) const = default;
};

struct ParticleSet {
  std::vector<Particle> particles;
  bool normalized = false;

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }
};

/// Scales weights to sum to one. Throws std::domain_error when the total is
/// not positive and finite.
void normalize_weights(ParticleSet& ps);

/// Noise coefficients of the rotation-translation-rotation odometry model.
/// Standard deviations are
///   rot1, rot2: alpha1 * |rot| + alpha2 * trans
///   trans:      alpha3 * trans + alpha4 * (|rot1| + |rot2|)
struct MotionNoise {
  double alpha1 = 0.05;
  double alpha2 = 0.05;
  double alpha3 = 0.02;
  double alpha4 = 0.02;

  static MotionNoise none() { return {0.0, 0.0, 0.0, 0.0}; }
};

struct YawModelParams {
  double sigma_deg = 5.0;
};

/// N particles spread uniformly over the occupied cells, uniform heading,
/// weights 1/N. Throws std::invalid_argument for N == 0 or an empty grid.
ParticleSet initialize_global(const VirtualScanGrid& grid, std::size_t n, Rng& rng);

/// Gaussian cloud around a known pose, for tracking runs.
ParticleSet initialize_around(const Pose2& pose, std::size_t n, double sigma_xy,
                              double sigma_theta, Rng& rng);

ParticleSet predict(ParticleSet ps, const OdometryControl& u, const MotionNoise& noise, Rng& rng);

/// Inputs available to an observation model at one time step.
struct Observation {
  const RangeImage& image;  // query range image, grid intrinsics
  const PointCloud& cloud;  // query points, sensor frame
};

/// p(z | x) up to a constant. Implementations write the log of the weight
/// multiplier of every particle (-inf for zero) and report how many
/// model evaluations that took.
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;
  virtual std::string_view name() const = 0;
  virtual std::size_t log_likelihoods(std::span<const Particle> particles, const Observation& obs,
                                      std::span<double> out) const = 0;
};

/// Multiplies weights by exp(log_lik) and renormalizes. If every particle
/// would drop to zero the previous (normalized) weights are kept.
void apply_log_likelihoods(ParticleSet& ps, std::span<const double> log_lik);

struct OverlapModelParams {
  YawModelParams yaw;
  /// Overlap enters the weight as overlap^exponent.
  double overlap_exponent = 1.0;
  /// Multiplier for particles outside occupied cells.
  double weight_floor = 1e-6;
  /// Set false to drop the heading factor and weight by overlap alone.
  bool use_yaw = true;
};

/// Overlap x yaw observation model over a virtual scan grid. Scores each
/// occupied cell holding particles once per update.
class OverlapModel final : public ObservationModel {
 public:
  OverlapModel(const VirtualScanGrid& grid, const ObservationScorer& scorer,
               OverlapModelParams params = {});

  std::string_view name() const override { return "overlap"; }
  std::size_t log_likelihoods(std::span<const Particle> particles, const Observation& obs,
                              std::span<double> out) const override;

  /// log of the heading factor for a residual between estimated yaw and
  /// particle heading (both degrees).
  double log_yaw_factor(double yaw_est_deg, double theta_deg) const;

 private:
  const VirtualScanGrid& grid_;
  const ObservationScorer& scorer_;
  OverlapModelParams params_;
};

/// Overlap model update with default parameters apart from the yaw model.
/// Returns the number of scorer evaluations.
std::size_t update_weights(ParticleSet& ps, const RangeImage& query, const VirtualScanGrid& grid,
                           const ObservationScorer& scorer, const YawModelParams& yaw);

/// 1 / sum(w^2). Throws std::logic_error on an unnormalized set.
double effective_sample_size(const ParticleSet& ps);

/// Low-variance resampling of N equal-weight particles.
ParticleSet systematic_resample(const ParticleSet& ps, Rng& rng);

/// Resamples when ESS < threshold * N; otherwise returns the set unchanged.
ParticleSet resample_if_needed(ParticleSet ps, Rng& rng, double threshold = 0.5);

struct PoseEstimate {
  Pose2 pose;
  double position_std = 0.0;  // weighted planar standard deviation, meters
  bool converged = false;
};

PoseEstimate estimate_pose(const ParticleSet& ps, double convergence_std = 5.0);

struct MclParams {
  MotionNoise motion;
  double resample_threshold = 0.5;
  double convergence_std = 5.0;
};

struct StepTelemetry {
  std::size_t evaluations = 0;
  double ess = 0.0;  // after the weight update, before resampling
  bool resampled = false;
};

struct StepResult {
  PoseEstimate estimate;
  StepTelemetry telemetry;
};

/// One filter recursion: predict, weight, resample, extract the pose.
StepResult step(ParticleSet& ps, const OdometryControl& u, const Observation& obs,
                const ObservationModel& model, const MclParams& params, Rng& rng);

}  // namespace ovmcl
