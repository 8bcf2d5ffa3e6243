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

#include "ovmcl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>
#include <stdexcept>

namespace ovmcl {

namespace {

double location_error(const Pose2& a, const Pose2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (const double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

// Checkpoints are the convergence step and every `interval` frames after it.
bool checkpoints_pass(const RunResult& run, std::size_t t_conv, std::size_t upto,
                      const EvalConfig& cfg) {
  for (std::size_t t = t_conv; t < upto; t += cfg.check_interval) {
    if (!(location_error(run.estimates[t], run.truths[t]) < cfg.success_radius)) return false;
  }
  return true;
}

}  // namespace

void RunResult::validate() const {
  const std::size_t n = estimates.size();
  if (timestamps.size() != n || converged.size() != n || ess.size() != n ||
      evaluations.size() != n || step_seconds.size() != n ||
      (!truths.empty() && truths.size() != n)) {
    throw std::logic_error("RunResult: per-step sequences differ in length");
  }
}

std::optional<std::size_t> convergence_step(const RunResult& run) {
  for (std::size_t t = 0; t < run.converged.size(); ++t) {
    if (run.converged[t]) return t;
  }
  return std::nullopt;
}

bool judge_success(const RunResult& run, const EvalConfig& cfg) {
  run.validate();
  if (run.truths.empty()) throw std::invalid_argument("judge_success: run has no ground truth");
  if (cfg.check_interval == 0) throw std::invalid_argument("judge_success: check_interval must be > 0");
  const auto t_conv = convergence_step(run);
  if (!t_conv) return false;
  return checkpoints_pass(run, *t_conv, run.size(), cfg);
}

double success_rate(std::span<const RunResult> runs, const EvalConfig& cfg) {
  if (runs.empty()) throw std::invalid_argument("success_rate: no runs");
  std::size_t ok = 0;
  for (const auto& r : runs) ok += judge_success(r, cfg) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(runs.size());
}

RmseMetrics rmse_metrics(const RunResult& run, std::size_t from) {
  run.validate();
  if (run.truths.empty()) throw std::invalid_argument("rmse_metrics: run has no ground truth");
  if (from >= run.size()) throw std::invalid_argument("rmse_metrics: no steps to evaluate");
  double loc = 0.0;
  double yaw = 0.0;
  for (std::size_t t = from; t < run.size(); ++t) {
    const auto& e = run.estimates[t];
    const auto& g = run.truths[t];
    loc += (e.x - g.x) * (e.x - g.x) + (e.y - g.y) * (e.y - g.y);
    const double dyaw = wrap_degrees(rad2deg(e.theta - g.theta));
    yaw += dyaw * dyaw;
  }
  const auto n = static_cast<double>(run.size() - from);
  return {std::sqrt(loc / n), std::sqrt(yaw / n)};
}

RmseMetrics rmse_metrics(const RunResult& run) {
  const auto t = convergence_step(run);
  if (!t) throw std::logic_error("rmse_metrics: run never converged");
  return rmse_metrics(run, *t);
}

EvaluationCountReport evaluation_count_report(std::span<const RunResult> runs,
                                              std::optional<std::size_t> bound) {
  EvaluationCountReport rep;
  std::size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.evaluations.size());
  rep.mean_per_step.assign(longest, 0.0);
  rep.max_per_step.assign(longest, 0);
  std::vector<std::size_t> counts(longest, 0);
  double total = 0.0;
  std::size_t samples = 0;
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < r.evaluations.size(); ++t) {
      const auto e = r.evaluations[t];
      if (bound && e > *bound) {
        throw std::logic_error("evaluation_count_report: step exceeds the evaluation bound");
      }
      rep.mean_per_step[t] += static_cast<double>(e);
      rep.max_per_step[t] = std::max(rep.max_per_step[t], e);
      ++counts[t];
      total += static_cast<double>(e);
      ++samples;
      rep.overall_max = std::max(rep.overall_max, e);
    }
  }
  for (std::size_t t = 0; t < longest; ++t) {
    if (counts[t] > 0) rep.mean_per_step[t] /= static_cast<double>(counts[t]);
  }
  rep.overall_mean = samples > 0 ? total / static_cast<double>(samples) : 0.0;
  return rep;
}

QuerySequence make_query_sequence(std::vector<PointCloud> clouds,
                                  std::vector<OdometryControl> odometry,
                                  const SensorIntrinsics& intr) {
  if (clouds.size() != odometry.size()) {
    throw std::invalid_argument("make_query_sequence: scan and odometry counts differ");
  }
  QuerySequence seq;
  seq.images.reserve(clouds.size());
  for (std::size_t t = 0; t < clouds.size(); ++t) {
    seq.images.push_back(estimate_normals(spherical_project(clouds[t], intr)));
    seq.timestamps.push_back(static_cast<double>(t));
  }
  seq.clouds = std::move(clouds);
  seq.odometry = std::move(odometry);
  return seq;
}

RunResult run_localization(const VirtualScanGrid& grid, const ObservationModel& model,
                           const QuerySequence& seq, const RunOptions& opts) {
  if (seq.images.size() != seq.odometry.size() || seq.clouds.size() != seq.images.size()) {
    throw std::invalid_argument("run_localization: inconsistent query sequence");
  }
  const bool have_truth = !seq.truths.empty();
  if (have_truth && seq.truths.size() != seq.images.size()) {
    throw std::invalid_argument("run_localization: truth count differs from scan count");
  }
  if (opts.stop_on_failure && !have_truth) {
    throw std::invalid_argument("run_localization: stop_on_failure needs ground truth");
  }

  Rng rng(opts.seed);
  ParticleSet ps = initialize_global(grid, opts.particles, rng);
  MclParams mcl = opts.mcl;
  mcl.convergence_std = opts.judge.convergence_std;

  RunResult run;
  std::optional<std::size_t> t_conv;
  for (std::size_t t = 0; t < seq.images.size(); ++t) {
    const auto start = std::chrono::steady_clock::now();
    const Observation obs{seq.images[t], seq.clouds[t]};
    const StepResult res = step(ps, seq.odometry[t], obs, model, mcl, rng);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;

    run.timestamps.push_back(seq.timestamps.empty() ? static_cast<double>(t) : seq.timestamps[t]);
    run.estimates.push_back(res.estimate.pose);
    run.converged.push_back(res.estimate.converged);
    run.ess.push_back(res.telemetry.ess);
    run.evaluations.push_back(res.telemetry.evaluations);
    run.step_seconds.push_back(dt.count());
    if (have_truth) run.truths.push_back(seq.truths[t]);

    if (opts.stop_on_failure) {
      if (!t_conv && res.estimate.converged) t_conv = t;
      if (t_conv && (t - *t_conv) % opts.judge.check_interval == 0 &&
          !(location_error(res.estimate.pose, seq.truths[t]) < opts.judge.success_radius)) {
        run.complete = t + 1 == seq.images.size();
        break;
      }
    }
  }
  return run;
}

void write_trajectory(std::ostream& out, const RunResult& run) {
  run.validate();
  out << std::setprecision(10);
  for (std::size_t t = 0; t < run.size(); ++t) {
    const auto& e = run.estimates[t];
    out << run.timestamps[t] << ' ' << e.x << ' ' << e.y << ' ' << e.theta << ' '
        << (run.converged[t] ? 1 : 0) << ' ' << run.ess[t] << ' ' << run.evaluations[t] << '\n';
  }
}

void write_trajectory(const std::filesystem::path& path, const RunResult& run) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trajectory " + path.string());
  write_trajectory(out, run);
}

SetupSummary summarize(const std::string& model, std::size_t particles,
                       std::span<const RunResult> runs, const EvalConfig& cfg) {
  SetupSummary s;
  s.model = model;
  s.particles = particles;
  s.runs = runs.size();
  std::vector<double> loc;
  std::vector<double> yaw;
  double evals = 0.0;
  double secs = 0.0;
  std::size_t steps = 0;
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < r.size(); ++t) {
      evals += static_cast<double>(r.evaluations[t]);
      secs += r.step_seconds[t];
      ++steps;
    }
    if (!judge_success(r, cfg)) continue;
    ++s.successes;
    const auto m = rmse_metrics(r);
    loc.push_back(m.location);
    yaw.push_back(m.yaw);
  }
  std::tie(s.location_rmse_mean, s.location_rmse_std) = mean_std(loc);
  std::tie(s.yaw_rmse_mean, s.yaw_rmse_std) = mean_std(yaw);
  if (steps > 0) {
    s.mean_evaluations = evals / static_cast<double>(steps);
    s.mean_step_seconds = secs / static_cast<double>(steps);
  }
  return s;
}

void write_summary_table(std::ostream& out, std::span<const SetupSummary> rows) {
  out << std::left << std::setw(11) << "model" << std::right << std::setw(10) << "particles"
      << std::setw(9) << "success" << std::setw(20) << "location RMSE [m]" << std::setw(20)
      << "yaw RMSE [deg]" << std::setw(12) << "evals/step" << std::setw(12) << "s/step" << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    std::ostringstream loc;
    std::ostringstream yaw;
    loc << std::fixed << std::setprecision(2) << r.location_rmse_mean << " +- " << r.location_rmse_std;
    yaw << std::fixed << std::setprecision(2) << r.yaw_rmse_mean << " +- " << r.yaw_rmse_std;
    out << std::left << std::setw(11) << r.model << std::right << std::setw(10) << r.particles
        << std::setw(9) << std::setprecision(2) << r.success_rate() << std::setw(20)
        << (r.successes > 0 ? loc.str() : "-") << std::setw(20)
        << (r.successes > 0 ? yaw.str() : "-") << std::setw(12) << std::setprecision(1)
        << r.mean_evaluations << std::setw(12) << std::setprecision(4) << r.mean_step_seconds
        << '\n';
  }
  out.unsetf(std::ios::fixed);
}

void write_summary_csv(std::ostream& out, std::span<const SetupSummary> rows) {
  out << "model,particles,runs,successes,success_rate,location_rmse_mean,location_rmse_std,"
         "yaw_rmse_mean,yaw_rmse_std,mean_evaluations,mean_step_seconds\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.model << ',' << r.particles << ',' << r.runs << ',' << r.successes << ','
        << r.success_rate() << ',' << r.location_rmse_mean << ',' << r.location_rmse_std << ','
        << r.yaw_rmse_mean << ',' << r.yaw_rmse_std << ',' << r.mean_evaluations << ','
        << r.mean_step_seconds << '\n';
  }
}

}  // namespace ovmcl
