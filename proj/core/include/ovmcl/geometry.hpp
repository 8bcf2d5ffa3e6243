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

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace ovmcl {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle in radians to [-pi, pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  w -= kPi;
  // fmod can land exactly on +pi after the shift for inputs like -pi - tiny
  return w >= kPi ? w - 2.0 * kPi : w;
}

/// Wraps an angle in degrees to [-180, 180).
inline double wrap_degrees(double a) {
  double w = std::fmod(a + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  w -= 180.0;
  return w >= 180.0 ? w - 360.0 : w;
}

/// Planar pose in the map frame. theta is counter-clockwise from +x.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool operator==(const Pose2&) const = default;
};

/// Relative planar motion expressed in the frame of the earlier pose.
struct OdometryControl {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;

  bool operator==(const OdometryControl&) const = default;
};

inline Pose2 compose(const Pose2& p, const OdometryControl& u) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return {p.x + c * u.dx - s * u.dy, p.y + s * u.dx + c * u.dy,
          wrap_angle(p.theta + u.dtheta)};
}

/// Motion taking `from` to `to`, in the frame of `from`.
inline OdometryControl relative_motion(const Pose2& from, const Pose2& to) {
  const double c = std::cos(from.theta);
  const double s = std::sin(from.theta);
  const double ddx = to.x - from.x;
  const double ddy = to.y - from.y;
  return {c * ddx + s * ddy, -s * ddx + c * ddy,
          wrap_angle(to.theta - from.theta)};
}

/// Sensor pose in 3-D for a planar pose with the sensor mounted at `height`.
inline Eigen::Isometry3d to_isometry(const Pose2& p, double height) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = Eigen::AngleAxisd(p.theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  t.translation() = Eigen::Vector3d(p.x, p.y, height);
  return t;
}

/// Planar projection of a 3-D pose: translation x/y and yaw of the x axis.
inline Pose2 to_pose2(const Eigen::Isometry3d& t) {
  const Eigen::Vector3d fwd = t.linear().col(0);
  return {t.translation().x(), t.translation().y(), wrap_angle(std::atan2(fwd.y(), fwd.x()))};
}

}  // namespace ovmcl
