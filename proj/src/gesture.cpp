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

#include "vrmeet/gesture.hpp"

#include <algorithm>
#include <numbers>

#include "json_util.hpp"
#include "vrmeet/errors.hpp"

namespace vrmeet {

void validate(const GestureConfig& cfg) {
  const std::pair<const char*, double> positive[] = {
      {"swipe_min_speed", cfg.swipe_min_speed},
      {"swipe_min_duration", cfg.swipe_min_duration},
      {"swipe_min_displacement", cfg.swipe_min_displacement},
      {"dominance_ratio", cfg.dominance_ratio},
      {"palm_cone_half_angle", cfg.palm_cone_half_angle},
      {"gaze_margin", cfg.gaze_margin},
      {"window", cfg.window},
  };
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      detail::schema_error(name, "must be positive");
    }
  }
  if (cfg.dominance_ratio < 1.0) {
    detail::schema_error("dominance_ratio", "must be at least 1");
  }
}

GestureConfig parse_gesture_config(std::string_view json_text) {
  using namespace detail;
  const json doc = parse_document(json_text);
  if (!doc.is_object()) schema_error("", "gesture config must be an object");
  GestureConfig cfg;
  const std::pair<const char*, double*> fields[] = {
      {"swipe_min_speed", &cfg.swipe_min_speed},
      {"swipe_min_duration", &cfg.swipe_min_duration},
      {"swipe_min_displacement", &cfg.swipe_min_displacement},
      {"dominance_ratio", &cfg.dominance_ratio},
      {"palm_cone_half_angle", &cfg.palm_cone_half_angle},
      {"gaze_margin", &cfg.gaze_margin},
      {"window", &cfg.window},
  };
  for (const auto& [name, target] : fields) {
    if (const auto it = doc.find(name); it != doc.end()) {
      *target = get_number(*it, name);
    }
  }
  if (const auto it = doc.find("swipe_left_advances"); it != doc.end()) {
    cfg.swipe_left_advances = get_bool(*it, "swipe_left_advances");
  }
  validate(cfg);
  return cfg;
}

bool palm_faces_head(const HandFrame& hand, const Pose& head,
                     const GestureConfig& cfg) {
  if (!hand.tracked) return false;
  const Vec3 to_head = head.position - hand.palm.position;
  const double dist = to_head.norm();
  if (!(dist > 0.0)) return false;
  const Vec3 normal = forward_vector(hand.palm);
  const double cos_angle = std::clamp(normal.dot(to_head / dist), -1.0, 1.0);
  const double limit = cfg.palm_cone_half_angle * std::numbers::pi / 180.0;
  return std::acos(cos_angle) <= limit;
}

std::optional<Swipe> detect_swipe(std::span<const HandSample> samples,
                                  const GestureConfig& cfg) {
  std::vector<const HandSample*> tracked;
  for (const auto& s : samples) {
    if (s.frame.tracked) tracked.push_back(&s);
  }
  // Earliest-ending qualifying span wins.
  for (std::size_t j = 1; j < tracked.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double dt_ms = tracked[j]->ts_ms - tracked[i]->ts_ms;
      if (dt_ms < cfg.swipe_min_duration || !(dt_ms > 0.0)) continue;
      const Vec3 d = tracked[j]->frame.palm.position - tracked[i]->frame.palm.position;
      const double lateral = std::abs(d.x);
      if (lateral < cfg.swipe_min_displacement) continue;
      if (lateral / (dt_ms / 1000.0) < cfg.swipe_min_speed) continue;
      if (lateral < cfg.dominance_ratio * std::max(std::abs(d.y), std::abs(d.z))) {
        continue;
      }
      return d.x > 0.0 ? Swipe::right : Swipe::left;
    }
  }
  return std::nullopt;
}

std::optional<Swipe> detect_swipe(const GestureWindow& win,
                                  const GestureConfig& cfg) {
  if (auto s = detect_swipe(win.right, cfg)) return s;
  return detect_swipe(win.left, cfg);
}

std::optional<std::string> gaze_target(const Pose& head,
                                       std::span<const ElementView> view,
                                       const GestureConfig& cfg) {
  const Vec3 origin = head.position;
  const Vec3 dir = forward_vector(head);
  // Each half-span grows by gaze_margin of itself: 1 m wide at 0.10 gives
  // +-0.55 m.
  const double scale = 1.0 + cfg.gaze_margin;

  std::optional<std::string> best;
  double best_t = 0.0;
  for (const auto& el : view) {
    const Vec3 normal = forward_vector(el.local_pose);
    const double denom = dir.dot(normal);
    if (std::abs(denom) < 1e-12) continue;
    const double t = (el.local_pose.position - origin).dot(normal) / denom;
    if (!(t > 0.0)) continue;
    const Vec3 hit = origin + dir * t;
    const Vec3 local = transform_point(invert(el.local_pose), hit);
    if (std::abs(local.x) > 0.5 * el.extent.width * scale) continue;
    if (std::abs(local.y) > 0.5 * el.extent.height * scale) continue;
    if (!best || t < best_t) {
      best = el.element_id;
      best_t = t;
    }
  }
  return best;
}

std::vector<ElementView> room_view(const Room& room, std::string_view viewpoint_id) {
  std::vector<ElementView> view;
  for (const auto& el : room.elements) {
    view.push_back(
        {el.id, element_pose_in_viewpoint(room, viewpoint_id, el.id), el.extent});
  }
  return view;
}

std::optional<ElementCommand> dispatch(std::optional<Swipe> swipe,
                                       const std::optional<std::string>& gaze,
                                       const Room& room, const GestureConfig& cfg) {
  if (!swipe || !gaze) return std::nullopt;
  const auto* el = room.find_element(*gaze);
  if (!el) return std::nullopt;
  if (el->kind != ElementKind::projector_surface && el->kind != ElementKind::tv) {
    return std::nullopt;
  }
  const bool advance = (*swipe == Swipe::left) == cfg.swipe_left_advances;
  return ElementCommand{el->id, advance ? SlideCommand::next() : SlideCommand::prev()};
}

GestureKind to_gesture_kind(Swipe s) {
  return s == Swipe::left ? GestureKind::swipe_left : GestureKind::swipe_right;
}

std::optional<Swipe> to_swipe(GestureKind k) {
  if (k == GestureKind::swipe_left) return Swipe::left;
  if (k == GestureKind::swipe_right) return Swipe::right;
  return std::nullopt;
}

GestureRecognizer::GestureRecognizer(GestureConfig cfg) : cfg_(cfg) {
  validate(cfg_);
}

std::vector<GestureEvent> GestureRecognizer::push(double ts_ms,
                                                  const HandFrame& frame) {
  std::vector<GestureEvent> events;
  auto& samples = window_.samples(frame.hand);
  if (!samples.empty() && ts_ms < samples.back().ts_ms) return events;

  // After a swipe the hand has to slow down before a new one can start, so
  // the tail of one motion never fires twice.
  bool& settling = settling_[frame.hand == Hand::left ? 0 : 1];
  if (settling) {
    const bool slow =
        samples.empty() || !frame.tracked || !samples.back().frame.tracked ||
        ts_ms <= samples.back().ts_ms ||
        std::abs(frame.palm.position.x - samples.back().frame.palm.position.x) /
                ((ts_ms - samples.back().ts_ms) / 1000.0) <
            cfg_.swipe_min_speed;
    samples.clear();
    if (slow) settling = false;
  }
  samples.push_back({ts_ms, frame});
  const double horizon = ts_ms - cfg_.window;
  samples.erase(samples.begin(),
                std::find_if(samples.begin(), samples.end(),
                             [&](const HandSample& s) { return s.ts_ms >= horizon; }));

  if (frame.hand == Hand::left) {
    const bool facing = palm_faces_head(frame, window_.head, cfg_);
    if (facing && !menu_visible_) {
      events.push_back({GestureKind::menu_open, {}, gaze_target(window_.head, view_, cfg_)});
    }
    menu_visible_ = facing;
  }

  if (const auto swipe = detect_swipe(samples, cfg_)) {
    samples.erase(samples.begin(), samples.end() - 1);
    settling = true;
    events.push_back(
        {to_gesture_kind(*swipe), {}, gaze_target(window_.head, view_, cfg_)});
  }
  return events;
}

}  // namespace vrmeet
