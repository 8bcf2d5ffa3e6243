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

#include "ovmcl/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ovmcl/scan_io.hpp"

namespace ovmcl {

namespace {

struct Rect {
  double x0, y0, x1, y1;
  bool intersects(const Rect& o, double margin = 0.0) const {
    return x0 < o.x1 + margin && o.x0 < x1 + margin && y0 < o.y1 + margin && o.y0 < y1 + margin;
  }
};

Rect footprint(const Box& b) {
  return {b.min().x(), b.min().y(), b.max().x(), b.max().y()};
}

Rect corridor(const std::pair<Eigen::Vector2d, Eigen::Vector2d>& road, double half_width) {
  const auto& [a, b] = road;
  return {std::min(a.x(), b.x()) - half_width, std::min(a.y(), b.y()) - half_width,
          std::max(a.x(), b.x()) + half_width, std::max(a.y(), b.y()) + half_width};
}

// Box spanning [t0, t1] along an axis-aligned road and [c0, c1] across it,
// with "across" measured to the left of the driving direction.
Box road_aligned_box(const std::pair<Eigen::Vector2d, Eigen::Vector2d>& road, double t0, double t1,
                     double c0, double c1, double height, BoxKind kind) {
  const auto& [a, b] = road;
  const Eigen::Vector2d dir = (b - a).normalized();
  const Eigen::Vector2d left(-dir.y(), dir.x());
  const Eigen::Vector2d p0 = a + dir * t0 + left * c0;
  const Eigen::Vector2d p1 = a + dir * t1 + left * c1;
  Box box;
  box.kind = kind;
  const Eigen::Vector2d lo = p0.cwiseMin(p1);
  const Eigen::Vector2d hi = p0.cwiseMax(p1);
  box.center = Eigen::Vector3d(0.5 * (lo.x() + hi.x()), 0.5 * (lo.y() + hi.y()), 0.5 * height);
  box.extents = Eigen::Vector3d(hi.x() - lo.x(), hi.y() - lo.y(), height);
  return box;
}

// Slab test. Returns the first positive crossing of the box surface.
std::optional<double> intersect_box(const Box& box, const Eigen::Vector3d& o,
                                    const Eigen::Vector3d& d) {
  const Eigen::Vector3d lo = box.min();
  const Eigen::Vector3d hi = box.max();
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_far < t_near || t_far <= 0.0) return std::nullopt;
  return t_near > 0.0 ? t_near : t_far;
}

const char* kind_name(BoxKind k) { return k == BoxKind::kCar ? "car" : "building"; }

constexpr double kCarLength = 4.5;
constexpr double kCarWidth = 1.8;
constexpr double kCarHeight = 1.5;
constexpr double kCurbOffset = 3.0;

}  // namespace

void WorldModel::validate() const {
  if (!(bounds_min.x() < bounds_max.x() && bounds_min.y() < bounds_max.y())) {
    throw std::invalid_argument("world: empty bounds");
  }
  for (const auto& b : boxes) {
    if (!(b.extents.array() > 0.0).all()) throw std::invalid_argument("world: box with empty extents");
    if (!contains(b.min().x(), b.min().y()) || !contains(b.max().x(), b.max().y())) {
      throw std::invalid_argument("world: box outside bounds");
    }
  }
}

DeskLayout desk_layout() {
  using V = Eigen::Vector2d;
  DeskLayout l;
  l.roads = {{V(30, 30), V(170, 30)},  {V(30, 100), V(170, 100)}, {V(30, 170), V(170, 170)},
             {V(30, 30), V(30, 170)},  {V(170, 30), V(170, 170)}};
  l.query_route = {V(30, 30),  V(170, 30),  V(170, 100), V(30, 100),
                   V(30, 170), V(170, 170), V(170, 100)};
  l.map_route = {V(30, 100), V(30, 30),  V(170, 30), V(170, 170),
                 V(30, 170), V(30, 100), V(170, 100)};
  return l;
}

WorldModel make_desk_world(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const DeskLayout layout = desk_layout();
  WorldModel world;
  const Rect inner{1.0, 1.0, 199.0, 199.0};

  std::vector<Rect> road_clear;
  for (const auto& r : layout.roads) road_clear.push_back(corridor(r, 6.0));

  auto fits = [&](const Rect& fp, const std::vector<Box>& others, double margin) {
    if (fp.x0 < inner.x0 || fp.y0 < inner.y0 || fp.x1 > inner.x1 || fp.y1 > inner.y1) return false;
    for (const auto& o : others) {
      if (fp.intersects(footprint(o), margin)) return false;
    }
    return true;
  };

  for (const auto& road : layout.roads) {
    const double len = (road.second - road.first).norm();
    for (double side : {-1.0, 1.0}) {
      double t = uni(4.0, 12.0);
      while (t < len - 8.0) {
        const double width = uni(8.0, 22.0);
        const double setback = uni(7.0, 11.0);
        const double depth = uni(8.0, 18.0);
        const double height = uni(6.0, 25.0);
        const Box b = road_aligned_box(road, t, std::min(t + width, len + 10.0), side * setback,
                                       side * (setback + depth), height, BoxKind::kBuilding);
        const Rect fp = footprint(b);
        const bool clear = std::none_of(road_clear.begin(), road_clear.end(),
                                        [&](const Rect& c) { return fp.intersects(c); });
        if (clear && fits(fp, world.boxes, 1.0)) world.boxes.push_back(b);
        t += width + uni(3.0, 10.0);
      }
    }
  }

  std::vector<Box> cars;
  const std::size_t target_cars = 30;
  for (int attempt = 0; attempt < 2000 && cars.size() < target_cars; ++attempt) {
    const auto ri = std::uniform_int_distribution<std::size_t>(0, layout.roads.size() - 1)(rng);
    const auto& road = layout.roads[ri];
    const double len = (road.second - road.first).norm();
    const double side = uni(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double t = uni(10.0, len - 10.0 - kCarLength);
    const double c = side * kCurbOffset;
    const Box car = road_aligned_box(road, t, t + kCarLength, c - 0.5 * kCarWidth,
                                     c + 0.5 * kCarWidth, kCarHeight, BoxKind::kCar);
    const Rect fp = footprint(car);
    bool ok = fits(fp, cars, 0.5) && fits(fp, world.boxes, 0.5);
    for (std::size_t j = 0; ok && j < layout.roads.size(); ++j) {
      if (j != ri && fp.intersects(corridor(layout.roads[j], 4.5))) ok = false;
    }
    if (ok) cars.push_back(car);
  }
  world.boxes.insert(world.boxes.end(), cars.begin(), cars.end());
  return world;
}

std::optional<double> cast_ray(const WorldModel& world, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir) {
  std::optional<double> best;
  if (dir.z() < 0.0 && origin.z() > 0.0) best = -origin.z() / dir.z();
  for (const auto& box : world.boxes) {
    const auto t = intersect_box(box, origin, dir);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

RangeImage simulate_scan(const WorldModel& world, const Pose2& pose, const SensorIntrinsics& intr,
                         double sensor_height) {
  RangeImage img(intr);
  const Eigen::Vector3d origin(pose.x, pose.y, sensor_height);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(pose.theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();

  // Only boxes that can be reached within r_max matter for this pose.
  WorldModel local;
  local.bounds_min = world.bounds_min;
  local.bounds_max = world.bounds_max;
  for (const auto& b : world.boxes) {
    const Eigen::Vector3d closest = origin.cwiseMax(b.min()).cwiseMin(b.max());
    if ((closest - origin).norm() <= intr.r_max) local.boxes.push_back(b);
  }

  for (int i = 0; i < intr.height; ++i) {
    for (int j = 0; j < intr.width; ++j) {
      const Eigen::Vector3d dir = rot * pixel_ray(i, j, intr);
      const auto t = cast_ray(local, origin, dir);
      if (t && *t >= intr.r_min && *t <= intr.r_max) img.set_range(i, j, static_cast<float>(*t));
    }
  }
  return img;
}

std::vector<Pose2> sample_trajectory(const WorldModel& world, const TrajectorySpec& traj) {
  if (traj.waypoints.size() < 2) throw std::invalid_argument("trajectory: need >= 2 waypoints");
  if (!(traj.step_length > 0.0)) throw std::invalid_argument("trajectory: step_length must be > 0");
  for (const auto& w : traj.waypoints) {
    if (!world.contains(w.x(), w.y())) throw std::invalid_argument("trajectory: waypoint outside bounds");
  }

  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i) {
    cum.push_back(cum.back() + (traj.waypoints[i] - traj.waypoints[i - 1]).norm());
  }
  const double total = cum.back();

  std::vector<Pose2> poses;
  std::size_t seg = 0;
  for (std::size_t n = 0;; ++n) {
    const double s = static_cast<double>(n) * traj.step_length;
    if (s > total + 1e-9) break;
    while (seg + 2 < cum.size() && s >= cum[seg + 1]) ++seg;
    const Eigen::Vector2d& a = traj.waypoints[seg];
    const Eigen::Vector2d& b = traj.waypoints[seg + 1];
    const double seg_len = cum[seg + 1] - cum[seg];
    const double f = seg_len > 0.0 ? std::min(1.0, (s - cum[seg]) / seg_len) : 0.0;
    const Eigen::Vector2d p = a + f * (b - a);
    poses.push_back({p.x(), p.y(), wrap_angle(std::atan2(b.y() - a.y(), b.x() - a.x()))});
  }
  return poses;
}

Dataset generate_dataset(const WorldModel& world, const TrajectorySpec& traj,
                         const SensorIntrinsics& intr, double sensor_height) {
  Dataset ds;
  ds.intrinsics = intr;
  ds.sensor_height = sensor_height;
  ds.poses = sample_trajectory(world, traj);

  std::mt19937_64 rng(traj.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ds.odometry.reserve(ds.poses.size());
  for (std::size_t t = 0; t < ds.poses.size(); ++t) {
    if (t == 0) {
      ds.odometry.push_back({});
      continue;
    }
    OdometryControl u = relative_motion(ds.poses[t - 1], ds.poses[t]);
    u.dx += traj.odom_trans_sigma * gauss(rng);
    u.dy += traj.odom_trans_sigma * gauss(rng);
    u.dtheta = wrap_angle(u.dtheta + traj.odom_rot_sigma * gauss(rng));
    ds.odometry.push_back(u);
  }

  ds.scans.reserve(ds.poses.size());
  for (const auto& pose : ds.poses) {
    ds.scans.push_back(unproject(simulate_scan(world, pose, intr, sensor_height)));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& ds, double frame_period) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scans");
  PoseList poses;
  std::vector<OdometryRecord> odom;
  for (std::size_t t = 0; t < ds.scans.size(); ++t) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << t << ".bin";
    write_point_cloud(dir / "scans" / name.str(), ds.scans[t]);
    poses.push_back(to_isometry(ds.poses[t], ds.sensor_height));
    odom.push_back({static_cast<double>(t) * frame_period, ds.odometry[t]});
  }
  write_poses(dir / "poses.txt", poses);
  write_odometry(dir / "odometry.txt", odom);
}

WorldModel perturb_world(const WorldModel& world, std::uint64_t seed, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("perturb_world: fraction must be in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  std::vector<std::size_t> cars;
  for (std::size_t i = 0; i < world.boxes.size(); ++i) {
    if (world.boxes[i].kind == BoxKind::kCar) cars.push_back(i);
  }
  const auto n_changed = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(cars.size())));
  std::shuffle(cars.begin(), cars.end(), rng);

  // Slides a car along its long axis by 5-20 m, staying inside the bounds.
  auto slide = [&](const Box& car) {
    const int axis = car.extents.x() >= car.extents.y() ? 0 : 1;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Box moved = car;
      moved.center[axis] += (uni(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uni(5.0, 20.0);
      if (world.contains(moved.min().x(), moved.min().y()) &&
          world.contains(moved.max().x(), moved.max().y())) {
        return moved;
      }
    }
    Box moved = car;
    moved.center[axis] += moved.center[axis] > 0.5 * (world.bounds_min[axis] + world.bounds_max[axis])
                              ? -5.0
                              : 5.0;
    return moved;
  };

  WorldModel out = world;
  std::vector<bool> removed(world.boxes.size(), false);
  std::vector<Box> added;
  for (std::size_t n = 0; n < n_changed; ++n) {
    const std::size_t idx = cars[n];
    if (uni(0.0, 1.0) < 1.0 / 3.0) {
      removed[idx] = true;
    } else {
      out.boxes[idx] = slide(world.boxes[idx]);
    }
  }
  // new arrivals, modelled as copies of random cars slid along the curb
  for (std::size_t n = 0; n < n_changed / 2 && !cars.empty(); ++n) {
    const auto src = cars[std::uniform_int_distribution<std::size_t>(0, cars.size() - 1)(rng)];
    added.push_back(slide(world.boxes[src]));
  }

  std::vector<Box> kept;
  for (std::size_t i = 0; i < out.boxes.size(); ++i) {
    if (!removed[i]) kept.push_back(out.boxes[i]);
  }
  kept.insert(kept.end(), added.begin(), added.end());
  out.boxes = std::move(kept);
  return out;
}

std::string world_to_text(const WorldModel& world) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# ovmcl world v1\n";
  out << "bounds " << world.bounds_min.x() << ' ' << world.bounds_min.y() << ' '
      << world.bounds_max.x() << ' ' << world.bounds_max.y() << '\n';
  for (const auto& b : world.boxes) {
    out << "box " << kind_name(b.kind) << ' ' << b.center.x() << ' ' << b.center.y() << ' '
        << b.center.z() << ' ' << b.extents.x() << ' ' << b.extents.y() << ' ' << b.extents.z()
        << '\n';
  }
  return out.str();
}

WorldModel world_from_text(const std::string& text) {
  WorldModel world;
  std::istringstream in(text);
  std::string line;
  bool have_bounds = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "bounds") {
      if (!(ss >> world.bounds_min.x() >> world.bounds_min.y() >> world.bounds_max.x() >>
            world.bounds_max.y())) {
        throw std::invalid_argument("world: malformed bounds line");
      }
      have_bounds = true;
    } else if (tag == "box") {
      std::string kind;
      Box b;
      if (!(ss >> kind >> b.center.x() >> b.center.y() >> b.center.z() >> b.extents.x() >>
            b.extents.y() >> b.extents.z())) {
        throw std::invalid_argument("world: malformed box line");
      }
      if (kind == "car") {
        b.kind = BoxKind::kCar;
      } else if (kind == "building") {
        b.kind = BoxKind::kBuilding;
      } else {
        throw std::invalid_argument("world: unknown box kind '" + kind + "'");
      }
      world.boxes.push_back(b);
    } else {
      throw std::invalid_argument("world: unknown record '" + tag + "'");
    }
  }
  if (!have_bounds) throw std::invalid_argument("world: missing bounds");
  world.validate();
  return world;
}

void save_world(const std::filesystem::path& path, const WorldModel& world) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write world file " + path.string());
  out << world_to_text(world);
}

WorldModel load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open world file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return world_from_text(ss.str());
}

}  // namespace ovmcl
