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

#include <set>
#include <sstream>

#include "vrmeet/errors.hpp"
#include "vrmeet/harness.hpp"

namespace vrmeet {

CalibrateOutcome calibrate_room(const Room& room,
                                const std::vector<PoseGraphMeasurement>& measurements) {
  for (const auto& m : measurements) {
    for (const auto* id : {&m.from_id, &m.to_id}) {
      if (!room.find_viewpoint(*id)) {
        throw Error(Errc::unknown_id,
                    "measurement names seat '" + *id + "' which the manifest lacks", *id);
      }
    }
  }
  CalibrateOutcome out{room, align_viewpoints(measurements), {}};
  for (auto& vp : out.room.viewpoints) {
    const auto it = out.result.poses.find(vp.id);
    if (it == out.result.poses.end()) {
      out.untouched_viewpoints.push_back(vp.id);
    } else {
      vp.pose = it->second;
    }
  }
  return out;
}

ValidateOutcome validate_manifest_file(const std::filesystem::path& path) {
  const Room room = load_manifest(path, ParseMode::lenient);
  ValidateOutcome out;
  out.violations = validate_room(room, path.parent_path());
  out.exit_code = has_errors(out.violations) ? 1 : 0;
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream ss;
  for (const auto& v : violations) {
    ss << (v.severity == Severity::error ? "ERROR" : "WARNING") << ' ' << v.code;
    if (!v.subject.empty()) ss << " [" << v.subject << ']';
    ss << ": " << v.message << '\n';
  }
  return ss.str();
}

}  // namespace vrmeet
