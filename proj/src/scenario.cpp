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

#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "protocol_json.hpp"
#include "vrmeet/errors.hpp"
#include "vrmeet/harness.hpp"

namespace vrmeet {
namespace {

using detail::get_number;
using detail::get_string;
using detail::index_path;
using detail::join_path;
using detail::json;
using detail::require;
using detail::schema_error;

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, std::string("cannot read ") + what + " '" + path.string() + "'",
                path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<TrajectorySample> parse_trajectory(const json& doc, const std::string& path) {
  const json& arr = detail::get_array(doc, path);
  std::vector<TrajectorySample> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string sp = index_path(path, i);
    out.push_back({get_number(require(arr[i], sp, "t_ms"), join_path(sp, "t_ms")),
                   detail::hand_frame_from_json(require(arr[i], sp, "frame"),
                                                join_path(sp, "frame"))});
  }
  return out;
}

ActionKind parse_action_kind(const std::string& s, const std::string& path) {
  if (s == "join") return ActionKind::join;
  if (s == "sit") return ActionKind::sit;
  if (s == "move_head") return ActionKind::move_head;
  if (s == "play_hand_trajectory") return ActionKind::play_hand_trajectory;
  if (s == "command") return ActionKind::command;
  if (s == "swipe") return ActionKind::swipe;
  if (s == "leave") return ActionKind::leave;
  schema_error(path, "unknown action '" + s + "'");
}

ScenarioAction parse_action(const json& j, const std::string& path,
                            const std::filesystem::path& base_dir) {
  ScenarioAction a;
  a.at_ms = get_number(require(j, path, "at_ms"), join_path(path, "at_ms"));
  const std::string kind_path = join_path(path, "action");
  a.kind = parse_action_kind(get_string(require(j, path, "action"), kind_path), kind_path);
  switch (a.kind) {
    case ActionKind::join:
      break;
    case ActionKind::leave:
      if (const auto it = j.find("abrupt"); it != j.end()) {
        a.abrupt = detail::get_bool(*it, join_path(path, "abrupt"));
      }
      break;
    case ActionKind::sit:
      a.seat_id = get_string(require(j, path, "seat_id"), join_path(path, "seat_id"));
      break;
    case ActionKind::move_head:
      a.pose = detail::get_pose(require(j, path, "pose"), join_path(path, "pose"));
      break;
    case ActionKind::play_hand_trajectory:
      if (const auto it = j.find("trajectory"); it != j.end()) {
        a.trajectory = parse_trajectory(*it, join_path(path, "trajectory"));
      } else {
        a.trajectory_file = get_string(require(j, path, "file"), join_path(path, "file"));
        const auto file = base_dir / a.trajectory_file;
        a.trajectory = parse_trajectory(
            detail::parse_document(read_file(file, "trajectory")), file.string());
      }
      break;
    case ActionKind::command:
      a.element_id =
          get_string(require(j, path, "element_id"), join_path(path, "element_id"));
      a.command = detail::slide_command_from_json(require(j, path, "command"),
                                                  join_path(path, "command"));
      break;
    case ActionKind::swipe: {
      const std::string dp = join_path(path, "direction");
      const std::string dir = get_string(require(j, path, "direction"), dp);
      if (dir == "left") {
        a.swipe = Swipe::left;
      } else if (dir == "right") {
        a.swipe = Swipe::right;
      } else {
        schema_error(dp, "expected \"left\" or \"right\"");
      }
      break;
    }
  }
  return a;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = detail::parse_document(text);
  if (!doc.is_object()) schema_error("", "scenario must be a JSON object");
  Scenario s;
  s.manifest_ref = base_dir / get_string(require(doc, "", "manifest"), "manifest");
  if (const auto it = doc.find("network"); it != doc.end()) {
    const json& n = *it;
    if (!n.is_object()) schema_error("network", "expected an object");
    if (const auto f = n.find("latency_ms"); f != n.end()) {
      s.network.latency_ms = get_number(*f, "network.latency_ms");
    }
    if (const auto f = n.find("jitter_ms"); f != n.end()) {
      s.network.jitter_ms = get_number(*f, "network.jitter_ms");
    }
    if (const auto f = n.find("seed"); f != n.end()) {
      s.network.seed = detail::get_uint(*f, "network.seed");
    }
  }
  if (const auto it = doc.find("tick_hz"); it != doc.end()) {
    s.tick_hz = get_number(*it, "tick_hz");
  }
  if (const auto it = doc.find("gesture"); it != doc.end()) {
    s.gesture = parse_gesture_config(it->dump());
  }
  const json& clients = detail::get_array(require(doc, "", "clients"), "clients");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const std::string cp = index_path("clients", i);
    ScenarioClient c;
    c.name = get_string(require(clients[i], cp, "name"), join_path(cp, "name"));
    const std::string ap = join_path(cp, "actions");
    const json& actions = detail::get_array(require(clients[i], cp, "actions"), ap);
    for (std::size_t k = 0; k < actions.size(); ++k) {
      c.actions.push_back(parse_action(actions[k], index_path(ap, k), base_dir));
    }
    s.clients.push_back(std::move(c));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path, "scenario"), path.parent_path());
}

void validate_scenario(const Scenario& s, const Room& room) {
  auto fail = [](const std::string& msg, const std::string& subject = {}) {
    throw Error(Errc::scenario, msg, subject);
  };
  if (!(s.network.latency_ms >= 0.0) || !(s.network.jitter_ms >= 0.0)) {
    fail("latency_ms and jitter_ms must be non-negative");
  }
  if (!(s.tick_hz > 0.0) || !std::isfinite(s.tick_hz)) fail("tick_hz must be positive");
  validate(s.gesture);

  std::set<std::string> names;
  for (const auto& c : s.clients) {
    if (c.name.empty()) fail("client with empty name");
    if (!names.insert(c.name).second) fail("duplicate client name '" + c.name + "'", c.name);
    double last = 0.0;
    for (const auto& a : c.actions) {
      if (!(a.at_ms >= last)) {
        fail("client '" + c.name + "' has decreasing or negative action times", c.name);
      }
      last = a.at_ms;
      if (a.kind == ActionKind::sit && !room.find_viewpoint(a.seat_id)) {
        fail("client '" + c.name + "' sits on unknown seat '" + a.seat_id + "'", a.seat_id);
      }
      if (a.kind == ActionKind::command && !room.find_element(a.element_id)) {
        fail("client '" + c.name + "' commands unknown element '" + a.element_id + "'",
             a.element_id);
      }
      double prev_t = 0.0;
      for (const auto& sample : a.trajectory) {
        if (!(sample.t_ms >= prev_t)) {
          fail("client '" + c.name + "' has a trajectory with decreasing times", c.name);
        }
        prev_t = sample.t_ms;
      }
    }
  }
}

HandFrame synthetic_hand(Hand hand, const Pose& palm) {
  HandFrame f;
  f.hand = hand;
  f.palm = palm;
  f.tracked = true;
  const double side = hand == Hand::left ? -1.0 : 1.0;
  for (int finger = 0; finger < 5; ++finger) {
    const double x = side * (finger - 2) * 0.02;
    for (int joint = 0; joint < 4; ++joint) {
      f.joints.push_back(transform_point(palm, {x, 0.0, -0.03 - 0.025 * joint}));
    }
  }
  return f;
}

std::vector<TrajectorySample> synthetic_swipe(Swipe direction) {
  const double sign = direction == Swipe::right ? 1.0 : -1.0;
  constexpr double kSpeed = 1.5;  // m/s
  constexpr int kSamples = 25;    // 0..240 ms at 10 ms
  std::vector<TrajectorySample> out;
  for (int i = 0; i < kSamples; ++i) {
    const double t = 10.0 * i;
    const double x = sign * (-0.18 + kSpeed * t / 1000.0);
    out.push_back({t, synthetic_hand(Hand::right, Pose{{x, -0.2, -0.35}, {}})});
  }
  return out;
}

}  // namespace vrmeet
