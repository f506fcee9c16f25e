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
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "vrmeet/errors.hpp"
#include "vrmeet/geometry.hpp"

namespace vrmeet::test {

inline constexpr double kPi = 3.14159265358979323846;

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(VRMEET_FIXTURE_DIR) / rel;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v{n(rng), n(rng), n(rng)};
    const double len = v.norm();
    if (len > 1e-6) return v / len;
  }
}

inline UnitQuat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return UnitQuat::from_wxyz(n(rng), n(rng), n(rng), n(rng));
}

inline Pose random_pose(std::mt19937_64& rng, double extent = 5.0) {
  return {{uniform(rng, -extent, extent), uniform(rng, -extent, extent),
           uniform(rng, -extent, extent)},
          random_quat(rng)};
}

// Independent oracle: 4x4 homogeneous matrix built with Eigen.
inline Eigen::Matrix4d matrix_of(const Pose& p) {
  const Eigen::Quaterniond q(p.orientation.w(), p.orientation.x(), p.orientation.y(),
                             p.orientation.z());
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = q.toRotationMatrix();
  m.block<3, 1>(0, 3) = Eigen::Vector3d(p.position.x, p.position.y, p.position.z);
  return m;
}

inline Eigen::Matrix4d axis_angle_matrix(const Eigen::Vector3d& axis, double degrees,
                                         const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) =
      Eigen::AngleAxisd(degrees * kPi / 180.0, axis.normalized()).toRotationMatrix();
  m.block<3, 1>(0, 3) = t;
  return m;
}

inline double pose_distance(const Pose& a, const Pose& b) {
  return (a.position - b.position).norm() + angular_distance(a.orientation, b.orientation);
}

inline ::testing::AssertionResult VecNear(const Vec3& a, const Vec3& b, double tol) {
  const double d = (a - b).norm();
  if (d <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure()
         << "(" << a.x << ", " << a.y << ", " << a.z << ") vs (" << b.x << ", " << b.y << ", "
         << b.z << "), distance " << d << " > " << tol;
}

inline ::testing::AssertionResult PoseNear(const Pose& a, const Pose& b, double tol) {
  const double dt = (a.position - b.position).norm();
  const double dr = angular_distance(a.orientation, b.orientation);
  if (dt <= tol && dr <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure()
         << "position (" << a.position.x << ", " << a.position.y << ", " << a.position.z
         << ") vs (" << b.position.x << ", " << b.position.y << ", " << b.position.z
         << "), translation error " << dt << ", rotation error " << dr << ", tol " << tol;
}

// Runs f and returns the vrmeet::Error it throws; records a failure when it
// returns normally.
template <typename F>
Error catch_error(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected vrmeet::Error";
  return Error(Errc::invalid_input, "no error thrown");
}

}  // namespace vrmeet::test
