// Copyright 2026 The vrmeet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vrmeet/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "vrmeet/errors.hpp"

namespace vrmeet {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleTolerance = 1e-9;

double deg_to_rad(double degrees) { return degrees * kPi / 180.0; }

}  // namespace

UnitQuat UnitQuat::from_wxyz(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(Errc::invalid_input, "quaternion must be finite and non-zero");
  }
  if (w < 0.0) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  // Already-unit input is kept bit-for-bit so serialized values round-trip.
  if (std::abs(n - 1.0) <= 1e-15) return UnitQuat(w, x, y, z);
  return UnitQuat(w / n, x / n, y / n, z / n);
}

UnitQuat UnitQuat::from_axis_angle(const Vec3& axis, double radians) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(Errc::invalid_input, "rotation axis must be non-zero");
  }
  const double s = std::sin(radians / 2.0) / n;
  return from_wxyz(std::cos(radians / 2.0), axis.x * s, axis.y * s,
                   axis.z * s);
}

UnitQuat UnitQuat::from_rotation_vector(const Vec3& rv) {
  const double theta = rv.norm();
  if (theta < 1e-12) {
    // Second-order expansion keeps tiny increments accurate.
    return from_wxyz(1.0 - theta * theta / 8.0, rv.x / 2.0, rv.y / 2.0,
                     rv.z / 2.0);
  }
  return from_axis_angle(rv, theta);
}

UnitQuat UnitQuat::operator*(const UnitQuat& o) const {
  return from_wxyz(w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
                   w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
                   w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
                   w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_);
}

UnitQuat UnitQuat::conjugate() const { return UnitQuat(w_, -x_, -y_, -z_); }

Vec3 UnitQuat::rotate(const Vec3& v) const {
  // v' = v + 2w(u x v) + 2 u x (u x v)
  const Vec3 u{x_, y_, z_};
  const Vec3 t = u.cross(v) * 2.0;
  return v + t * w_ + u.cross(t);
}

Vec3 UnitQuat::rotation_vector() const {
  const Vec3 u{x_, y_, z_};
  const double s = u.norm();
  if (s < 1e-12) return u * 2.0;
  // w >= 0 so the angle lies in [0, pi].
  const double theta = 2.0 * std::atan2(s, w_);
  return u * (theta / s);
}

double UnitQuat::angle() const {
  return 2.0 * std::atan2(Vec3{x_, y_, z_}.norm(), w_);
}

UnitQuat rot_x(double degrees) {
  return UnitQuat::from_axis_angle({1, 0, 0}, deg_to_rad(degrees));
}
UnitQuat rot_y(double degrees) {
  return UnitQuat::from_axis_angle({0, 1, 0}, deg_to_rad(degrees));
}
UnitQuat rot_z(double degrees) {
  return UnitQuat::from_axis_angle({0, 0, 1}, deg_to_rad(degrees));
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + a.orientation.rotate(b.position),
          a.orientation * b.orientation};
}

Pose invert(const Pose& p) {
  const UnitQuat inv = p.orientation.conjugate();
  return {-inv.rotate(p.position), inv};
}

Vec3 transform_point(const Pose& p, const Vec3& q) {
  return p.position + p.orientation.rotate(q);
}

Vec3 forward_vector(const Pose& p) {
  const Vec3 f = p.orientation.rotate({0.0, 0.0, -1.0});
  return f / f.norm();
}

EquirectCoord dir_to_equirect(const Vec3& d) {
  const double n = d.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(Errc::invalid_direction, "direction has zero length");
  }
  const Vec3 dn = d / n;
  const double yn = std::clamp(dn.y, -1.0, 1.0);
  const double v = 0.5 - std::asin(yn) / kPi;
  if (std::abs(std::abs(yn) - 1.0) <= kPoleTolerance) {
    return {0.5, yn > 0.0 ? 0.0 : 1.0};
  }
  double u = 0.5 + std::atan2(dn.x, -dn.z) / (2.0 * kPi);
  if (u >= 1.0) u -= 1.0;
  if (u < 0.0) u += 1.0;
  // u + 1 can round back up to 1.0 for tiny negative u.
  if (u >= 1.0) u = 0.0;
  return {u, v};
}

Vec3 equirect_to_dir(double u, double v) {
  if (!(u >= 0.0 && u < 1.0) || !(v >= 0.0 && v <= 1.0)) {
    throw Error(Errc::out_of_range, "equirect coordinate out of range");
  }
  if (v == 0.0) return {0.0, 1.0, 0.0};
  if (v == 1.0) return {0.0, -1.0, 0.0};
  const double lon = (u - 0.5) * 2.0 * kPi;
  const double lat = (0.5 - v) * kPi;
  const double c = std::cos(lat);
  return {c * std::sin(lon), std::sin(lat), -c * std::cos(lon)};
}

Pose to_viewpoint_frame(const Pose& viewer, const Pose& entity) {
  return compose(invert(viewer), entity);
}

double angular_distance(const UnitQuat& a, const UnitQuat& b) {
  return (a.conjugate() * b).angle();
}

}  // namespace vrmeet
