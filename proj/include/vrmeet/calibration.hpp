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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vrmeet/geometry.hpp"

namespace vrmeet {

// Measured pose of `to_id` expressed in the frame of `from_id`.
struct PoseGraphMeasurement {
  std::string from_id;
  std::string to_id;
  Pose relative;
  double weight = 1.0;

  friend bool operator==(const PoseGraphMeasurement&,
                         const PoseGraphMeasurement&) = default;
};

using PoseMap = std::map<std::string, Pose, std::less<>>;

struct CalibrationResult {
  PoseMap poses;
  double residual_rms = 0.0;
  int iterations_used = 0;
};

struct RefineOptions {
  int max_iters = 100;
  double tol = 1e-10;
};

// Throws Errc::empty_input, Errc::invalid_input (bad weight, self edge,
// non-finite pose) or Errc::disconnected_graph (subject lists the
// unreachable ids, comma separated).
void check_measurements(const std::vector<PoseGraphMeasurement>& measurements);

// Breadth-first composition from the lexicographically smallest id, which is
// pinned to identity.
PoseMap spanning_tree_init(const std::vector<PoseGraphMeasurement>& measurements);

// Weighted RMS over measurements of |t_pred - t_meas|^2 + angle(R_meas^T
// R_pred)^2, normalized by the total weight. Throws Errc::unknown_id when a
// measurement references a pose that is not in `poses`.
double residual_rms(const PoseMap& poses,
                    const std::vector<PoseGraphMeasurement>& measurements);

// Damped Gauss-Newton over all non-anchor poses. A step that increases the
// residual is halved until it does not; the residual never increases across
// accepted iterations.
CalibrationResult refine_poses(const PoseMap& init,
                               const std::vector<PoseGraphMeasurement>& measurements,
                               const RefineOptions& options = {});

CalibrationResult align_viewpoints(
    const std::vector<PoseGraphMeasurement>& measurements,
    const RefineOptions& options = {});

// Measurement file: [{"from", "to", "pose": {"pos", "quat"}, "weight"}].
std::vector<PoseGraphMeasurement> parse_measurements(std::string_view text);
std::vector<PoseGraphMeasurement> load_measurements(
    const std::filesystem::path& path);
std::string serialize_measurements(
    const std::vector<PoseGraphMeasurement>& measurements);

}  // namespace vrmeet
