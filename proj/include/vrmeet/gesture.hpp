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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrmeet/geometry.hpp"
#include "vrmeet/protocol.hpp"
#include "vrmeet/room.hpp"

namespace vrmeet {

// Thresholds for hand gestures. Distances in meters, times in milliseconds,
// angles in degrees.
struct GestureConfig {
  double swipe_min_speed = 0.8;         // m/s
  double swipe_min_duration = 150.0;    // ms
  double swipe_min_displacement = 0.15; // m
  double dominance_ratio = 2.0;
  double palm_cone_half_angle = 30.0;   // degrees
  double gaze_margin = 0.10;            // fraction of the half-extent, per side
  double window = 500.0;                // ms of retained history
  // A leftward (-X) swipe advances slides; flip to reverse the mapping.
  bool swipe_left_advances = true;

  friend bool operator==(const GestureConfig&, const GestureConfig&) = default;
};

// Throws Errc::schema naming the first invalid field.
void validate(const GestureConfig& cfg);
// Reads a JSON object whose fields are all optional.
GestureConfig parse_gesture_config(std::string_view json_text);

enum class Swipe { left, right };

struct HandSample {
  double ts_ms = 0.0;
  HandFrame frame;
};

// Per-hand history in the seat frame, plus the latest head pose.
struct GestureWindow {
  std::vector<HandSample> left;
  std::vector<HandSample> right;
  Pose head;

  std::vector<HandSample>& samples(Hand h) { return h == Hand::left ? left : right; }
  const std::vector<HandSample>& samples(Hand h) const {
    return h == Hand::left ? left : right;
  }
};

struct ElementView {
  std::string element_id;
  Pose local_pose;  // seat frame; -Z is the surface normal
  Extent extent;
};

bool palm_faces_head(const HandFrame& hand, const Pose& head,
                     const GestureConfig& cfg = {});

// Single-hand detection over time-ordered samples. Untracked samples are
// ignored.
std::optional<Swipe> detect_swipe(std::span<const HandSample> samples,
                                  const GestureConfig& cfg = {});
// Right hand first, then left.
std::optional<Swipe> detect_swipe(const GestureWindow& win,
                                  const GestureConfig& cfg = {});

// Nearest element rectangle hit by the head's forward ray.
std::optional<std::string> gaze_target(const Pose& head,
                                       std::span<const ElementView> view,
                                       const GestureConfig& cfg = {});

// Element poses as seen from one seat.
std::vector<ElementView> room_view(const Room& room, std::string_view viewpoint_id);

// Only fires when the gaze lands on a projector surface or TV.
std::optional<ElementCommand> dispatch(std::optional<Swipe> swipe,
                                       const std::optional<std::string>& gaze,
                                       const Room& room,
                                       const GestureConfig& cfg = {});

GestureKind to_gesture_kind(Swipe s);
std::optional<Swipe> to_swipe(GestureKind k);

// Stateful per-user recognizer: keeps the window, consumes it after a swipe
// fires (and waits for the hand to slow below swipe speed), and reports the left palm turning toward the head as menu_open.
class GestureRecognizer {
 public:
  explicit GestureRecognizer(GestureConfig cfg = {});

  void set_head(const Pose& head) { window_.head = head; }
  void set_room_view(std::vector<ElementView> view) { view_ = std::move(view); }

  // Out-of-order samples (earlier than the last one for that hand) are
  // dropped.
  std::vector<GestureEvent> push(double ts_ms, const HandFrame& frame);

  const GestureWindow& window() const { return window_; }
  const GestureConfig& config() const { return cfg_; }

 private:
  GestureConfig cfg_;
  GestureWindow window_;
  std::vector<ElementView> view_;
  bool menu_visible_ = false;
  std::array<bool, 2> settling_{};  // left, right
};

}  // namespace vrmeet
