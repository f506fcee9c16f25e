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

#include "vrmeet/calibration.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "json_util.hpp"
#include "vrmeet/errors.hpp"

namespace vrmeet {
namespace {

using Mat3 = Eigen::Matrix3d;
using V3 = Eigen::Vector3d;

V3 to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

Mat3 rotation_matrix(const UnitQuat& q) {
  return Eigen::Quaterniond(q.w(), q.x(), q.y(), q.z()).toRotationMatrix();
}

Mat3 skew(const V3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Inverse of the left Jacobian of SO(3).
Mat3 left_jacobian_inverse(const V3& theta_vec) {
  const double theta = theta_vec.norm();
  const Mat3 k = skew(theta_vec);
  double c;
  if (theta < 1e-6) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = 1.0 / (theta * theta) -
        (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * k + c * k * k;
}

struct EdgeResidual {
  V3 translation;
  V3 rotation;
};

EdgeResidual edge_residual(const Pose& pi, const Pose& pj,
                           const PoseGraphMeasurement& m) {
  const Pose predicted = compose(invert(pi), pj);
  const Vec3 dt = predicted.position - m.relative.position;
  const Vec3 rv = (m.relative.orientation.conjugate() * predicted.orientation)
                      .rotation_vector();
  return {to_eigen(dt), to_eigen(rv)};
}

const Pose& lookup(const PoseMap& poses, const std::string& id) {
  const auto it = poses.find(id);
  if (it == poses.end()) {
    throw Error(Errc::unknown_id, "no pose for viewpoint '" + id + "'", id);
  }
  return it->second;
}

std::string smallest_id(const std::vector<PoseGraphMeasurement>& measurements) {
  std::string best = measurements.front().from_id;
  for (const auto& m : measurements) {
    best = std::min({best, m.from_id, m.to_id});
  }
  return best;
}

double weighted_cost(const PoseMap& poses,
                     const std::vector<PoseGraphMeasurement>& measurements,
                     double* total_weight) {
  double cost = 0.0;
  double wsum = 0.0;
  for (const auto& m : measurements) {
    const auto r = edge_residual(lookup(poses, m.from_id), lookup(poses, m.to_id), m);
    cost += m.weight * (r.translation.squaredNorm() + r.rotation.squaredNorm());
    wsum += m.weight;
  }
  if (total_weight) *total_weight = wsum;
  return cost;
}

Pose apply_increment(const Pose& p, const Eigen::Matrix<double, 6, 1>& delta) {
  const Vec3 dt{delta[0], delta[1], delta[2]};
  const Vec3 dphi{delta[3], delta[4], delta[5]};
  return {p.position + dt, UnitQuat::from_rotation_vector(dphi) * p.orientation};
}

}  // namespace

void check_measurements(const std::vector<PoseGraphMeasurement>& measurements) {
  if (measurements.empty()) {
    throw Error(Errc::empty_input, "measurement list is empty");
  }
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    const std::string where = "measurement " + std::to_string(k);
    if (m.from_id.empty() || m.to_id.empty()) {
      throw Error(Errc::invalid_input, where + " has an empty id");
    }
    if (m.from_id == m.to_id) {
      throw Error(Errc::invalid_input, where + " connects '" + m.from_id +
                                           "' to itself", m.from_id);
    }
    if (!(m.weight > 0.0) || !std::isfinite(m.weight)) {
      throw Error(Errc::invalid_input, where + " has a non-positive weight");
    }
    if (!m.relative.position.finite()) {
      throw Error(Errc::invalid_input, where + " has a non-finite pose");
    }
  }
}

PoseMap spanning_tree_init(const std::vector<PoseGraphMeasurement>& measurements) {
  check_measurements(measurements);

  struct Adjacent {
    std::string neighbor;
    std::size_t edge;
    bool forward;
    auto operator<=>(const Adjacent&) const = default;
  };
  std::map<std::string, std::vector<Adjacent>> adjacency;
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    adjacency[m.from_id].push_back({m.to_id, k, true});
    adjacency[m.to_id].push_back({m.from_id, k, false});
  }
  for (auto& [id, list] : adjacency) std::sort(list.begin(), list.end());

  const std::string anchor = adjacency.begin()->first;
  PoseMap poses;
  poses.emplace(anchor, Pose::identity());
  std::deque<std::string> queue{anchor};
  while (!queue.empty()) {
    const std::string current = queue.front();
    queue.pop_front();
    const Pose& base = poses.at(current);
    for (const auto& adj : adjacency.at(current)) {
      if (poses.contains(adj.neighbor)) continue;
      const Pose& rel = measurements[adj.edge].relative;
      poses.emplace(adj.neighbor,
                    compose(base, adj.forward ? rel : invert(rel)));
      queue.push_back(adj.neighbor);
    }
  }

  if (poses.size() != adjacency.size()) {
    std::string missing;
    for (const auto& [id, list] : adjacency) {
      if (poses.contains(id)) continue;
      if (!missing.empty()) missing += ",";
      missing += id;
    }
    throw Error(Errc::disconnected_graph,
                "measurement graph is disconnected; unreachable from '" +
                    anchor + "': " + missing,
                missing);
  }
  return poses;
}

double residual_rms(const PoseMap& poses,
                    const std::vector<PoseGraphMeasurement>& measurements) {
  if (measurements.empty()) return 0.0;
  double wsum = 0.0;
  const double cost = weighted_cost(poses, measurements, &wsum);
  return std::sqrt(cost / wsum);
}

CalibrationResult refine_poses(const PoseMap& init,
                               const std::vector<PoseGraphMeasurement>& measurements,
                               const RefineOptions& options) {
  check_measurements(measurements);
  for (const auto& m : measurements) {
    for (const auto* id : {&m.from_id, &m.to_id}) {
      if (!init.contains(*id)) {
        throw Error(Errc::invalid_input,
                    "initial poses do not cover viewpoint '" + *id + "'", *id);
      }
    }
  }

  // Re-gauge so the anchor sits exactly at identity.
  const std::string anchor = smallest_id(measurements);
  const Pose gauge = invert(init.at(anchor));
  PoseMap poses;
  for (const auto& [id, p] : init) {
    poses.emplace(id, id == anchor ? Pose::identity() : compose(gauge, p));
  }

  std::map<std::string, int, std::less<>> index;
  for (const auto& m : measurements) {
    for (const auto* id : {&m.from_id, &m.to_id}) {
      if (*id != anchor && !index.contains(*id)) {
        index.emplace(*id, 0);
      }
    }
  }
  int next = 0;
  for (auto& [id, slot] : index) slot = next++;
  const int n = static_cast<int>(index.size()) * 6;

  CalibrationResult result;
  double wsum = 0.0;
  double cost = weighted_cost(poses, measurements, &wsum);

  for (int iter = 0; iter < options.max_iters && n > 0; ++iter) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);

    for (const auto& m : measurements) {
      const Pose& pi = poses.at(m.from_id);
      const Pose& pj = poses.at(m.to_id);
      const auto r = edge_residual(pi, pj, m);
      Eigen::Matrix<double, 6, 1> res;
      res << r.translation, r.rotation;

      const Mat3 ri_t = rotation_matrix(pi.orientation).transpose();
      const Mat3 rm_t = rotation_matrix(m.relative.orientation).transpose();
      const V3 d = to_eigen(pj.position - pi.position);
      const Mat3 rot_block = left_jacobian_inverse(r.rotation) * rm_t * ri_t;

      Eigen::Matrix<double, 6, 6> ji = Eigen::Matrix<double, 6, 6>::Zero();
      ji.block<3, 3>(0, 0) = -ri_t;
      ji.block<3, 3>(0, 3) = ri_t * skew(d);
      ji.block<3, 3>(3, 3) = -rot_block;
      Eigen::Matrix<double, 6, 6> jj = Eigen::Matrix<double, 6, 6>::Zero();
      jj.block<3, 3>(0, 0) = ri_t;
      jj.block<3, 3>(3, 3) = rot_block;

      const auto ii = index.find(m.from_id);
      const auto jj_it = index.find(m.to_id);
      const int bi = ii == index.end() ? -1 : ii->second * 6;
      const int bj = jj_it == index.end() ? -1 : jj_it->second * 6;
      const double w = m.weight;
      if (bi >= 0) {
        h.block<6, 6>(bi, bi) += w * ji.transpose() * ji;
        g.segment<6>(bi) += w * ji.transpose() * res;
      }
      if (bj >= 0) {
        h.block<6, 6>(bj, bj) += w * jj.transpose() * jj;
        g.segment<6>(bj) += w * jj.transpose() * res;
      }
      if (bi >= 0 && bj >= 0) {
        h.block<6, 6>(bi, bj) += w * ji.transpose() * jj;
        h.block<6, 6>(bj, bi) += w * jj.transpose() * ji;
      }
    }

    const Eigen::VectorXd step = h.ldlt().solve(-g);
    ++result.iterations_used;
    if (!step.allFinite()) break;

    bool accepted = false;
    double scale = 1.0;
    PoseMap candidate;
    double candidate_cost = cost;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      candidate = poses;
      for (const auto& [id, slot] : index) {
        candidate.at(id) = apply_increment(
            poses.at(id), scale * step.segment<6>(slot * 6));
      }
      candidate_cost = weighted_cost(candidate, measurements, nullptr);
      if (candidate_cost <= cost) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const double old_rms = std::sqrt(cost / wsum);
    const double new_rms = std::sqrt(candidate_cost / wsum);
    poses = std::move(candidate);
    cost = candidate_cost;
    if (old_rms - new_rms < options.tol) break;
  }

  result.residual_rms = std::sqrt(cost / wsum);
  result.poses = std::move(poses);
  return result;
}

CalibrationResult align_viewpoints(
    const std::vector<PoseGraphMeasurement>& measurements,
    const RefineOptions& options) {
  return refine_poses(spanning_tree_init(measurements), measurements, options);
}

std::vector<PoseGraphMeasurement> parse_measurements(std::string_view text) {
  using namespace detail;
  const json doc = parse_document(text);
  if (!doc.is_array()) schema_error("", "measurement file must be a JSON array");
  std::vector<PoseGraphMeasurement> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = index_path("", i);
    const json& j = doc[i];
    PoseGraphMeasurement m;
    m.from_id = get_string(require(j, path, "from"), join_path(path, "from"));
    m.to_id = get_string(require(j, path, "to"), join_path(path, "to"));
    m.relative = get_pose(require(j, path, "pose"), join_path(path, "pose"));
    if (const auto it = j.find("weight"); it != j.end()) {
      m.weight = get_number(*it, join_path(path, "weight"));
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<PoseGraphMeasurement> load_measurements(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot read measurements '" + path.string() + "'",
                path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_measurements(ss.str());
}

std::string serialize_measurements(
    const std::vector<PoseGraphMeasurement>& measurements) {
  using namespace detail;
  json doc = json::array();
  for (const auto& m : measurements) {
    doc.push_back({{"from", m.from_id},
                   {"to", m.to_id},
                   {"pose", pose_to_json(m.relative)},
                   {"weight", m.weight}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace vrmeet
