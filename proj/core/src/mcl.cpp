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

#include "ovmcl/mcl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ovmcl {

void normalize_weights(ParticleSet& ps) {
  double total = 0.0;
  for (const auto& p : ps.particles) total += p.weight;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::domain_error("normalize_weights: total weight is not positive");
  }
  for (auto& p : ps.particles) p.weight /= total;
  ps.normalized = true;
}

ParticleSet initialize_global(const VirtualScanGrid& grid, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("initialize_global: need at least one particle");
  const auto cells = grid.occupied_cells();
  if (cells.empty()) throw std::invalid_argument("initialize_global: grid has no occupied cells");

  const auto& geom = grid.geometry();
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> heading(-kPi, kPi);

  ParticleSet ps;
  ps.particles.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CellIndex c = geom.unlinear(cells[pick(rng)]);
    const double x = geom.origin.x() + (c.ix + unit(rng)) * geom.resolution;
    const double y = geom.origin.y() + (c.iy + unit(rng)) * geom.resolution;
    ps.particles.push_back({x, y, wrap_angle(heading(rng)), w});
  }
  ps.normalized = true;
  return ps;
}

ParticleSet initialize_around(const Pose2& pose, std::size_t n, double sigma_xy,
                              double sigma_theta, Rng& rng) {
  if (n == 0) throw std::invalid_argument("initialize_around: need at least one particle");
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParticleSet ps;
  ps.particles.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    ps.particles.push_back({pose.x + sigma_xy * gauss(rng), pose.y + sigma_xy * gauss(rng),
                            wrap_angle(pose.theta + sigma_theta * gauss(rng)), w});
  }
  ps.normalized = true;
  return ps;
}

ParticleSet predict(ParticleSet ps, const OdometryControl& u, const MotionNoise& noise, Rng& rng) {
  const double trans = std::hypot(u.dx, u.dy);
  const double rot1 = trans < 1e-9 ? 0.0 : std::atan2(u.dy, u.dx);
  const double rot2 = wrap_angle(u.dtheta - rot1);

  const double sd_rot1 = noise.alpha1 * std::abs(rot1) + noise.alpha2 * trans;
  const double sd_trans = noise.alpha3 * trans + noise.alpha4 * (std::abs(rot1) + std::abs(rot2));
  const double sd_rot2 = noise.alpha1 * std::abs(rot2) + noise.alpha2 * trans;

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& p : ps.particles) {
    const double r1 = rot1 - (sd_rot1 > 0.0 ? sd_rot1 * gauss(rng) : 0.0);
    const double t = trans - (sd_trans > 0.0 ? sd_trans * gauss(rng) : 0.0);
    const double r2 = rot2 - (sd_rot2 > 0.0 ? sd_rot2 * gauss(rng) : 0.0);
    p.x += t * std::cos(p.theta + r1);
    p.y += t * std::sin(p.theta + r1);
    p.theta = wrap_angle(p.theta + r1 + r2);
  }
  return ps;
}

void apply_log_likelihoods(ParticleSet& ps, std::span<const double> log_lik) {
  if (log_lik.size() != ps.size()) {
    throw std::invalid_argument("apply_log_likelihoods: one value per particle required");
  }
  std::vector<double> lw(ps.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double w = ps.particles[i].weight;
    lw[i] = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) + log_lik[i];
    if (std::isnan(lw[i])) lw[i] = -std::numeric_limits<double>::infinity();
    best = std::max(best, lw[i]);
  }
  if (!std::isfinite(best)) {
    // uninformative step: keep the prior
    normalize_weights(ps);
    return;
  }
  for (std::size_t i = 0; i < ps.size(); ++i) ps.particles[i].weight = std::exp(lw[i] - best);
  normalize_weights(ps);
}

OverlapModel::OverlapModel(const VirtualScanGrid& grid, const ObservationScorer& scorer,
                           OverlapModelParams params)
    : grid_(grid), scorer_(scorer), params_(params) {
  if (!(params_.yaw.sigma_deg > 0.0)) throw std::invalid_argument("OverlapModel: sigma must be > 0");
  if (!(params_.weight_floor > 0.0)) throw std::invalid_argument("OverlapModel: floor must be > 0");
}

double OverlapModel::log_yaw_factor(double yaw_est_deg, double theta_deg) const {
  const double r = wrap_degrees(yaw_est_deg - theta_deg) / params_.yaw.sigma_deg;
  return -0.5 * r * r;
}

std::size_t OverlapModel::log_likelihoods(std::span<const Particle> particles,
                                          const Observation& obs, std::span<double> out) const {
  constexpr std::size_t kOffGrid = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> cell_of(particles.size(), kOffGrid);
  std::vector<std::size_t> distinct;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (const auto c = grid_.lookup(particles[i].x, particles[i].y)) {
      cell_of[i] = *c;
      distinct.push_back(*c);
    }
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  // Each cell is scored once; the query changes every step so nothing is kept.
  std::vector<OverlapEstimate> scores(distinct.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(distinct.size()); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    scores[idx] = scorer_.score(obs.image, grid_.scan(distinct[idx]));
  }

  const double log_floor = std::log(params_.weight_floor);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (cell_of[i] == kOffGrid) {
      out[i] = log_floor;
      continue;
    }
    const auto k = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), cell_of[i]) - distinct.begin());
    const auto& s = scores[k];
    double l = s.overlap > 0.0 ? params_.overlap_exponent * std::log(s.overlap)
                               : -std::numeric_limits<double>::infinity();
    if (params_.use_yaw) l += log_yaw_factor(s.yaw_offset, rad2deg(particles[i].theta));
    out[i] = l;
  }
  return distinct.size();
}

std::size_t update_weights(ParticleSet& ps, const RangeImage& query, const VirtualScanGrid& grid,
                           const ObservationScorer& scorer, const YawModelParams& yaw) {
  OverlapModelParams params;
  params.yaw = yaw;
  const OverlapModel model(grid, scorer, params);
  const PointCloud no_points;
  std::vector<double> log_lik(ps.size());
  const auto evals = model.log_likelihoods(ps.particles, Observation{query, no_points}, log_lik);
  apply_log_likelihoods(ps, log_lik);
  return evals;
}

double effective_sample_size(const ParticleSet& ps) {
  if (!ps.normalized) throw std::logic_error("effective_sample_size: particle set not normalized");
  double sq = 0.0;
  for (const auto& p : ps.particles) sq += p.weight * p.weight;
  return 1.0 / sq;
}

ParticleSet systematic_resample(const ParticleSet& ps, Rng& rng) {
  if (!ps.normalized) throw std::logic_error("systematic_resample: particle set not normalized");
  const std::size_t n = ps.size();
  ParticleSet out;
  out.particles.reserve(n);
  const double step = 1.0 / static_cast<double>(n);
  const double start = std::uniform_real_distribution<double>(0.0, step)(rng);
  std::size_t i = 0;
  double cum = ps.particles[0].weight;
  for (std::size_t m = 0; m < n; ++m) {
    const double target = start + static_cast<double>(m) * step;
    while (target > cum && i + 1 < n) cum += ps.particles[++i].weight;
    Particle p = ps.particles[i];
    p.weight = step;
    out.particles.push_back(p);
  }
  out.normalized = true;
  return out;
}

ParticleSet resample_if_needed(ParticleSet ps, Rng& rng, double threshold) {
  if (effective_sample_size(ps) < threshold * static_cast<double>(ps.size())) {
    return systematic_resample(ps, rng);
  }
  return ps;
}

PoseEstimate estimate_pose(const ParticleSet& ps, double convergence_std) {
  double wsum = 0.0;
  double mx = 0.0;
  double my = 0.0;
  double s = 0.0;
  double c = 0.0;
  for (const auto& p : ps.particles) {
    wsum += p.weight;
    mx += p.weight * p.x;
    my += p.weight * p.y;
    s += p.weight * std::sin(p.theta);
    c += p.weight * std::cos(p.theta);
  }
  PoseEstimate est;
  if (!(wsum > 0.0)) return est;
  mx /= wsum;
  my /= wsum;
  double var = 0.0;
  for (const auto& p : ps.particles) {
    var += p.weight * ((p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my));
  }
  est.pose = {mx, my, wrap_angle(std::atan2(s, c))};
  est.position_std = std::sqrt(var / wsum);
  est.converged = est.position_std < convergence_std;
  return est;
}

StepResult step(ParticleSet& ps, const OdometryControl& u, const Observation& obs,
                const ObservationModel& model, const MclParams& params, Rng& rng) {
  if (ps.empty()) throw std::invalid_argument("step: empty particle set");
  ps = predict(std::move(ps), u, params.motion, rng);

  StepResult result;
  std::vector<double> log_lik(ps.size());
  result.telemetry.evaluations = model.log_likelihoods(ps.particles, obs, log_lik);
  apply_log_likelihoods(ps, log_lik);
  result.telemetry.ess = effective_sample_size(ps);

  if (result.telemetry.ess < params.resample_threshold * static_cast<double>(ps.size())) {
    ps = systematic_resample(ps, rng);
    result.telemetry.resampled = true;
  }
  result.estimate = estimate_pose(ps, params.convergence_std);
  return result;
}

}  // namespace ovmcl
