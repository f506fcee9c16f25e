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

#pragma once

#include <cmath>
#include <utility>

namespace vrmeet {

// Room frame convention: right-handed, +Y up, forward is -Z, right is +X.

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Unit quaternion, stored canonicalized with w >= 0.
class UnitQuat {
 public:
  UnitQuat() = default;

  // Normalizes and canonicalizes. Throws Errc::invalid_input on a zero or
  // non-finite quaternion.
  static UnitQuat from_wxyz(double w, double x, double y, double z);
  // Rotation of `radians` about `axis` (right-hand rule).
  static UnitQuat from_axis_angle(const Vec3& axis, double radians);
  // Exponential map of a rotation vector.
  static UnitQuat from_rotation_vector(const Vec3& rv);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  UnitQuat operator*(const UnitQuat& o) const;
  UnitQuat conjugate() const;
  Vec3 rotate(const Vec3& v) const;
  // Log map; result has norm in [0, pi].
  Vec3 rotation_vector() const;
  double angle() const;

  friend bool operator==(const UnitQuat&, const UnitQuat&) = default;

 private:
  UnitQuat(double w, double x, double y, double z)
      : w_(w), x_(x), y_(y), z_(z) {}

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

struct Pose {
  Vec3 position;
  UnitQuat orientation;

  static Pose identity() { return {}; }
  static Pose translation(double x, double y, double z) {
    return {{x, y, z}, {}};
  }

  friend bool operator==(const Pose&, const Pose&) = default;
};

UnitQuat rot_x(double degrees);
UnitQuat rot_y(double degrees);
UnitQuat rot_z(double degrees);

// compose(a, b) transforms a point by b first, then by a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);
Vec3 transform_point(const Pose& p, const Vec3& q);
// Orientation applied to (0,0,-1).
Vec3 forward_vector(const Pose& p);

struct EquirectCoord {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const EquirectCoord&, const EquirectCoord&) = default;
};

// u = 0.5 + atan2(x, -z) / 2pi wrapped to [0, 1), v = 0.5 - asin(y) / pi.
// Directions within 1e-9 of a pole map to u = 0.5.
// Throws Errc::invalid_direction for norms <= 1e-12.
EquirectCoord dir_to_equirect(const Vec3& d);
// Throws Errc::out_of_range unless u in [0, 1) and v in [0, 1].
Vec3 equirect_to_dir(double u, double v);

// Re-expresses a room-frame entity pose in the frame of `viewer`.
Pose to_viewpoint_frame(const Pose& viewer, const Pose& entity);

// Angle between two orientations, in radians.
double angular_distance(const UnitQuat& a, const UnitQuat& b);

}  // namespace vrmeet
