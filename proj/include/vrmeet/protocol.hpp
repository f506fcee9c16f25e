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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vrmeet/geometry.hpp"
#include "vrmeet/room.hpp"

namespace vrmeet {

inline constexpr std::uint16_t kDefaultPort = 7870;
inline constexpr std::string_view kSessionPath = "/session";

enum class Hand { left, right };

// Joints run thumb to pinky, each finger proximal to tip.
inline constexpr std::size_t kJointsPerHand = 20;

struct HandFrame {
  Hand hand = Hand::left;
  Pose palm;  // seat frame
  std::vector<Vec3> joints;
  bool tracked = true;

  friend bool operator==(const HandFrame&, const HandFrame&) = default;
};

using SeatMap = std::map<std::string, std::optional<std::string>, std::less<>>;

struct UserEntry {
  std::string session_id;
  std::string display_name;
  std::optional<std::string> seat_id;
  Pose head;
  friend bool operator==(const UserEntry&, const UserEntry&) = default;
};

struct ElementEntry {
  std::string id;
  ElementState state;
  friend bool operator==(const ElementEntry&, const ElementEntry&) = default;
};

struct ClientHello {
  std::string display_name;
  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};

struct Snapshot {
  std::string room_id;
  SeatMap seats;
  std::vector<UserEntry> users;  // sorted by session_id
  std::vector<ElementEntry> elements;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct ServerWelcome {
  std::string session_id;
  Snapshot snapshot;
  friend bool operator==(const ServerWelcome&, const ServerWelcome&) = default;
};

struct SeatRequest {
  std::string seat_id;
  friend bool operator==(const SeatRequest&, const SeatRequest&) = default;
};

// A granted update moves the session to `seat_id` (vacating any previous
// seat), or frees its seat when `seat_id` is null.
struct SeatUpdate {
  std::string session_id;
  std::optional<std::string> seat_id;
  bool granted = false;
  friend bool operator==(const SeatUpdate&, const SeatUpdate&) = default;
};

// `session_id`/`seat_id` name the owner and are only set on server relays.
struct PoseUpdate {
  Pose head;
  std::optional<std::string> session_id;
  std::optional<std::string> seat_id;
  friend bool operator==(const PoseUpdate&, const PoseUpdate&) = default;
};

struct HandUpdate {
  std::vector<HandFrame> frames;
  std::optional<std::string> session_id;
  std::optional<std::string> seat_id;
  friend bool operator==(const HandUpdate&, const HandUpdate&) = default;
};

enum class SlideOp { next_slide, prev_slide, set_slide, set_content };

struct SlideCommand {
  SlideOp op = SlideOp::next_slide;
  std::uint64_t slide = 0;  // set_slide only
  std::string content_id;   // set_content only

  static SlideCommand next() { return {SlideOp::next_slide, 0, {}}; }
  static SlideCommand prev() { return {SlideOp::prev_slide, 0, {}}; }
  static SlideCommand set_slide(std::uint64_t n) { return {SlideOp::set_slide, n, {}}; }
  static SlideCommand set_content(std::string id) {
    return {SlideOp::set_content, 0, std::move(id)};
  }
  friend bool operator==(const SlideCommand&, const SlideCommand&) = default;
};

struct ElementCommand {
  std::string element_id;
  SlideCommand command;
  friend bool operator==(const ElementCommand&, const ElementCommand&) = default;
};

struct ElementStateMsg {
  std::string element_id;
  ElementState state;
  friend bool operator==(const ElementStateMsg&, const ElementStateMsg&) = default;
};

enum class GestureKind { swipe_left, swipe_right, menu_open, menu_select };

struct GestureEvent {
  GestureKind kind = GestureKind::swipe_left;
  std::string item;  // menu_select only
  std::optional<std::string> gaze_element;
  friend bool operator==(const GestureEvent&, const GestureEvent&) = default;
};

struct Leave {
  friend bool operator==(const Leave&, const Leave&) = default;
};

struct ErrorMsg {
  std::string code;
  std::string detail;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message =
    std::variant<ClientHello, ServerWelcome, Snapshot, SeatRequest, SeatUpdate,
                 PoseUpdate, HandUpdate, ElementCommand, ElementStateMsg,
                 GestureEvent, Leave, ErrorMsg>;

inline constexpr std::size_t kMessageTypeCount = std::variant_size_v<Message>;

// snake_case wire tag, indexed like Message.
std::string_view message_type_name(std::size_t index);
std::string_view message_type_name(const Message& m);

struct Envelope {
  std::uint64_t seq = 0;
  std::string session_id;  // empty before welcome
  double ts_ms = 0.0;
  Message body;

  std::string_view msg_type() const { return message_type_name(body); }
  friend bool operator==(const Envelope&, const Envelope&) = default;
};

// One JSON object followed by '\n'. Throws Errc::encoding on non-finite
// numbers or an invalid hand frame.
std::string encode_message(const Envelope& env);

// Accepts a single line with or without its trailing '\n'. Throws
// Errc::syntax (offset = byte), Errc::unknown_type (subject = tag) or
// Errc::schema (subject = field path).
Envelope decode_message(std::string_view line);

enum class SeqDecision { accept, stale };

SeqDecision accept_sequence(std::optional<std::uint64_t> last_seen,
                            std::uint64_t seq);

// Stable 64-bit FNV-1a hex digest over a canonical serialization of the seat
// map and element states.
std::string state_digest(const SeatMap& seats,
                         const std::map<std::string, ElementState, std::less<>>& elements);

std::string_view to_string(Hand h);
std::string_view to_string(SlideOp op);
std::string_view to_string(GestureKind k);

}  // namespace vrmeet
