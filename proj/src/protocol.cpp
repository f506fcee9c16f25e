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

#include "vrmeet/protocol.hpp"

#include <cstdio>

#include "json_util.hpp"
#include "protocol_json.hpp"
#include "vrmeet/errors.hpp"

namespace vrmeet {

using detail::json;

namespace {

constexpr std::array<std::string_view, kMessageTypeCount> kTypeNames{
    "client_hello",  "server_welcome",    "snapshot",      "seat_request",
    "seat_update",   "pose_update",       "hand_update",   "element_command",
    "element_state_msg", "gesture_event", "leave",         "error_msg"};

template <std::size_t I = 0>
Message default_message(std::size_t index) {
  if constexpr (I < kMessageTypeCount) {
    if (index == I) return Message{std::in_place_index<I>};
    return default_message<I + 1>(index);
  } else {
    return Message{};
  }
}

// ---- encoding ---------------------------------------------------------------

json nullable(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

}  // namespace

json detail::state_to_json(const ElementState& s) {
  return json{{"version", s.version},
              {"slide_index", s.slide_index},
              {"slide_count", s.slide_count},
              {"content_id", s.content_id}};
}

json detail::hand_frame_to_json(const HandFrame& f) {
  if (f.tracked ? f.joints.size() != kJointsPerHand
                : !(f.joints.empty() || f.joints.size() == kJointsPerHand)) {
    throw Error(Errc::encoding, "hand frame must carry exactly 20 joints",
                "joints");
  }
  json joints = json::array();
  for (const auto& j : f.joints) joints.push_back(detail::vec3_to_json(j));
  return json{{"hand", to_string(f.hand)},
              {"palm", detail::pose_to_json(f.palm)},
              {"joints", std::move(joints)},
              {"tracked", f.tracked}};
}

json detail::slide_command_to_json(const SlideCommand& c) {
  json cmd{{"op", to_string(c.op)}};
  if (c.op == SlideOp::set_slide) cmd["slide"] = c.slide;
  if (c.op == SlideOp::set_content) cmd["content_id"] = c.content_id;
  return cmd;
}

namespace {

using detail::hand_frame_to_json;
using detail::state_to_json;

json snapshot_to_json(const Snapshot& s) {
  json seats = json::object();
  for (const auto& [vp, holder] : s.seats) seats[vp] = nullable(holder);
  json users = json::array();
  for (const auto& u : s.users) {
    users.push_back({{"session_id", u.session_id},
                     {"display_name", u.display_name},
                     {"seat_id", nullable(u.seat_id)},
                     {"head", detail::pose_to_json(u.head)}});
  }
  json elements = json::array();
  for (const auto& e : s.elements) {
    elements.push_back({{"id", e.id}, {"state", state_to_json(e.state)}});
  }
  return json{{"room_id", s.room_id},
              {"seats", std::move(seats)},
              {"users", std::move(users)},
              {"elements", std::move(elements)}};
}

void put_owner(json& j, const std::optional<std::string>& session_id,
               const std::optional<std::string>& seat_id) {
  if (session_id) j["session_id"] = *session_id;
  if (seat_id) j["seat_id"] = *seat_id;
}

struct BodyEncoder {
  json operator()(const ClientHello& m) const {
    return {{"display_name", m.display_name}};
  }
  json operator()(const ServerWelcome& m) const {
    return {{"session_id", m.session_id}, {"snapshot", snapshot_to_json(m.snapshot)}};
  }
  json operator()(const Snapshot& m) const { return snapshot_to_json(m); }
  json operator()(const SeatRequest& m) const { return {{"seat_id", m.seat_id}}; }
  json operator()(const SeatUpdate& m) const {
    return {{"session_id", m.session_id},
            {"seat_id", nullable(m.seat_id)},
            {"granted", m.granted}};
  }
  json operator()(const PoseUpdate& m) const {
    json j{{"head", detail::pose_to_json(m.head)}};
    put_owner(j, m.session_id, m.seat_id);
    return j;
  }
  json operator()(const HandUpdate& m) const {
    json frames = json::array();
    for (const auto& f : m.frames) frames.push_back(hand_frame_to_json(f));
    json j{{"frames", std::move(frames)}};
    put_owner(j, m.session_id, m.seat_id);
    return j;
  }
  json operator()(const ElementCommand& m) const {
    return {{"element_id", m.element_id},
            {"command", detail::slide_command_to_json(m.command)}};
  }
  json operator()(const ElementStateMsg& m) const {
    return {{"element_id", m.element_id}, {"state", state_to_json(m.state)}};
  }
  json operator()(const GestureEvent& m) const {
    json j{{"kind", to_string(m.kind)}, {"gaze_element", nullable(m.gaze_element)}};
    if (m.kind == GestureKind::menu_select) j["item"] = m.item;
    return j;
  }
  json operator()(const Leave&) const { return json::object(); }
  json operator()(const ErrorMsg& m) const {
    return {{"code", m.code}, {"detail", m.detail}};
  }
};

bool all_finite(const json& j) {
  switch (j.type()) {
    case json::value_t::number_float:
      return std::isfinite(j.get<double>());
    case json::value_t::array:
    case json::value_t::object:
      for (const auto& item : j) {
        if (!all_finite(item)) return false;
      }
      return true;
    default:
      return true;
  }
}

// ---- decoding ---------------------------------------------------------------

using detail::get_bool;
using detail::get_nullable_string;
using detail::get_pose;
using detail::get_string;
using detail::get_uint;
using detail::get_vec3;
using detail::index_path;
using detail::join_path;
using detail::require;
using detail::schema_error;

ElementState state_from_json(const json& j, const std::string& path) {
  ElementState s;
  s.version = get_uint(require(j, path, "version"), join_path(path, "version"));
  s.slide_index =
      get_uint(require(j, path, "slide_index"), join_path(path, "slide_index"));
  s.slide_count =
      get_uint(require(j, path, "slide_count"), join_path(path, "slide_count"));
  s.content_id =
      get_string(require(j, path, "content_id"), join_path(path, "content_id"));
  if (s.slide_count == 0) schema_error(join_path(path, "slide_count"), "must be positive");
  if (s.slide_index >= s.slide_count) {
    schema_error(join_path(path, "slide_index"), "must be below slide_count");
  }
  return s;
}

}  // namespace

HandFrame detail::hand_frame_from_json(const json& j, const std::string& path) {
  HandFrame f;
  const std::string hand_path = join_path(path, "hand");
  const std::string hand = get_string(require(j, path, "hand"), hand_path);
  if (hand == "left") {
    f.hand = Hand::left;
  } else if (hand == "right") {
    f.hand = Hand::right;
  } else {
    schema_error(hand_path, "expected \"left\" or \"right\"");
  }
  f.palm = get_pose(require(j, path, "palm"), join_path(path, "palm"));
  f.tracked = get_bool(require(j, path, "tracked"), join_path(path, "tracked"));
  const std::string joints_path = join_path(path, "joints");
  const json& joints = detail::get_array(require(j, path, "joints"), joints_path);
  const bool ok = f.tracked ? joints.size() == kJointsPerHand
                            : (joints.empty() || joints.size() == kJointsPerHand);
  if (!ok) {
    schema_error(joints_path, "expected exactly 20 joints, got " +
                                  std::to_string(joints.size()));
  }
  for (std::size_t i = 0; i < joints.size(); ++i) {
    f.joints.push_back(get_vec3(joints[i], index_path(joints_path, i)));
  }
  return f;
}

SlideCommand detail::slide_command_from_json(const json& cmd, const std::string& cp) {
  const std::string op_path = join_path(cp, "op");
  const std::string op = get_string(require(cmd, cp, "op"), op_path);
  if (op == "next_slide") return SlideCommand::next();
  if (op == "prev_slide") return SlideCommand::prev();
  if (op == "set_slide") {
    return SlideCommand::set_slide(
        get_uint(require(cmd, cp, "slide"), join_path(cp, "slide")));
  }
  if (op == "set_content") {
    return SlideCommand::set_content(
        get_string(require(cmd, cp, "content_id"), join_path(cp, "content_id")));
  }
  schema_error(op_path, "unknown command '" + op + "'");
}

namespace {

using detail::hand_frame_from_json;

Snapshot snapshot_from_json(const json& j, const std::string& path) {
  Snapshot s;
  s.room_id = get_string(require(j, path, "room_id"), join_path(path, "room_id"));
  const std::string seats_path = join_path(path, "seats");
  const json& seats = require(j, path, "seats");
  if (!seats.is_object()) schema_error(seats_path, "expected an object");
  for (const auto& [vp, holder] : seats.items()) {
    s.seats.emplace(vp, get_nullable_string(holder, join_path(seats_path, vp)));
  }
  const std::string users_path = join_path(path, "users");
  const json& users = detail::get_array(require(j, path, "users"), users_path);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const std::string up = index_path(users_path, i);
    const json& u = users[i];
    s.users.push_back(
        {get_string(require(u, up, "session_id"), join_path(up, "session_id")),
         get_string(require(u, up, "display_name"), join_path(up, "display_name")),
         get_nullable_string(require(u, up, "seat_id"), join_path(up, "seat_id")),
         get_pose(require(u, up, "head"), join_path(up, "head"))});
  }
  const std::string els_path = join_path(path, "elements");
  const json& els = detail::get_array(require(j, path, "elements"), els_path);
  for (std::size_t i = 0; i < els.size(); ++i) {
    const std::string ep = index_path(els_path, i);
    s.elements.push_back(
        {get_string(require(els[i], ep, "id"), join_path(ep, "id")),
         state_from_json(require(els[i], ep, "state"), join_path(ep, "state"))});
  }
  return s;
}

std::optional<std::string> optional_string(const json& j, const std::string& path,
                                           const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return get_string(*it, join_path(path, key));
}

struct BodyDecoder {
  const json& j;
  const std::string& path;

  void operator()(ClientHello& m) const {
    m.display_name = get_string(require(j, path, "display_name"),
                                join_path(path, "display_name"));
  }
  void operator()(ServerWelcome& m) const {
    m.session_id =
        get_string(require(j, path, "session_id"), join_path(path, "session_id"));
    m.snapshot = snapshot_from_json(require(j, path, "snapshot"),
                                    join_path(path, "snapshot"));
  }
  void operator()(Snapshot& m) const { m = snapshot_from_json(j, path); }
  void operator()(SeatRequest& m) const {
    m.seat_id = get_string(require(j, path, "seat_id"), join_path(path, "seat_id"));
  }
  void operator()(SeatUpdate& m) const {
    m.session_id =
        get_string(require(j, path, "session_id"), join_path(path, "session_id"));
    m.seat_id = get_nullable_string(require(j, path, "seat_id"),
                                    join_path(path, "seat_id"));
    m.granted = get_bool(require(j, path, "granted"), join_path(path, "granted"));
  }
  void operator()(PoseUpdate& m) const {
    m.head = get_pose(require(j, path, "head"), join_path(path, "head"));
    m.session_id = optional_string(j, path, "session_id");
    m.seat_id = optional_string(j, path, "seat_id");
  }
  void operator()(HandUpdate& m) const {
    const std::string fp = join_path(path, "frames");
    const json& frames = detail::get_array(require(j, path, "frames"), fp);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      m.frames.push_back(hand_frame_from_json(frames[i], index_path(fp, i)));
    }
    m.session_id = optional_string(j, path, "session_id");
    m.seat_id = optional_string(j, path, "seat_id");
  }
  void operator()(ElementCommand& m) const {
    m.element_id =
        get_string(require(j, path, "element_id"), join_path(path, "element_id"));
    const std::string cp = join_path(path, "command");
    m.command = detail::slide_command_from_json(require(j, path, "command"), cp);
  }
  void operator()(ElementStateMsg& m) const {
    m.element_id =
        get_string(require(j, path, "element_id"), join_path(path, "element_id"));
    m.state = state_from_json(require(j, path, "state"), join_path(path, "state"));
  }
  void operator()(GestureEvent& m) const {
    const std::string kp = join_path(path, "kind");
    const std::string kind = get_string(require(j, path, "kind"), kp);
    if (kind == "swipe_left") {
      m.kind = GestureKind::swipe_left;
    } else if (kind == "swipe_right") {
      m.kind = GestureKind::swipe_right;
    } else if (kind == "menu_open") {
      m.kind = GestureKind::menu_open;
    } else if (kind == "menu_select") {
      m.kind = GestureKind::menu_select;
      m.item = get_string(require(j, path, "item"), join_path(path, "item"));
    } else {
      schema_error(kp, "unknown gesture '" + kind + "'");
    }
    m.gaze_element = get_nullable_string(require(j, path, "gaze_element"),
                                         join_path(path, "gaze_element"));
  }
  void operator()(Leave&) const {}
  void operator()(ErrorMsg& m) const {
    m.code = get_string(require(j, path, "code"), join_path(path, "code"));
    m.detail = get_string(require(j, path, "detail"), join_path(path, "detail"));
  }
};

}  // namespace

std::string_view message_type_name(std::size_t index) {
  return index < kTypeNames.size() ? kTypeNames[index] : std::string_view{};
}

std::string_view message_type_name(const Message& m) {
  return message_type_name(m.index());
}

std::string_view to_string(Hand h) { return h == Hand::left ? "left" : "right"; }

std::string_view to_string(SlideOp op) {
  switch (op) {
    case SlideOp::next_slide: return "next_slide";
    case SlideOp::prev_slide: return "prev_slide";
    case SlideOp::set_slide: return "set_slide";
    case SlideOp::set_content: return "set_content";
  }
  return "";
}

std::string_view to_string(GestureKind k) {
  switch (k) {
    case GestureKind::swipe_left: return "swipe_left";
    case GestureKind::swipe_right: return "swipe_right";
    case GestureKind::menu_open: return "menu_open";
    case GestureKind::menu_select: return "menu_select";
  }
  return "";
}

std::string encode_message(const Envelope& env) {
  if (!std::isfinite(env.ts_ms)) {
    throw Error(Errc::encoding, "ts_ms must be finite", "ts_ms");
  }
  json body = std::visit(BodyEncoder{}, env.body);
  if (!all_finite(body)) {
    throw Error(Errc::encoding, "message body contains a non-finite number",
                "body");
  }
  const json doc{{"msg_type", env.msg_type()},
                 {"seq", env.seq},
                 {"session_id", env.session_id},
                 {"ts_ms", env.ts_ms},
                 {"body", std::move(body)}};
  // dump() escapes control characters, so the line never embeds '\n'.
  std::string out;
  try {
    out = doc.dump();
  } catch (const json::type_error& e) {
    throw Error(Errc::encoding, std::string("cannot encode message: ") + e.what());
  }
  out.push_back('\n');
  return out;
}

Envelope decode_message(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) {
    throw Error(Errc::syntax, "message spans more than one line", {},
                line.find('\n'));
  }
  const json doc = detail::parse_document(line);
  if (!doc.is_object()) schema_error("", "message must be a JSON object");

  const std::string type = get_string(require(doc, "", "msg_type"), "msg_type");
  std::size_t index = kTypeNames.size();
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == type) index = i;
  }
  if (index == kTypeNames.size()) {
    throw Error(Errc::unknown_type, "unknown msg_type '" + type + "'", type);
  }

  Envelope env;
  env.seq = get_uint(require(doc, "", "seq"), "seq");
  env.session_id = get_string(require(doc, "", "session_id"), "session_id");
  env.ts_ms = detail::get_number(require(doc, "", "ts_ms"), "ts_ms");
  const json& body = require(doc, "", "body");
  if (!body.is_object()) schema_error("body", "expected an object");
  env.body = default_message(index);
  const std::string body_path = "body";
  std::visit(BodyDecoder{body, body_path}, env.body);
  return env;
}

SeqDecision accept_sequence(std::optional<std::uint64_t> last_seen,
                            std::uint64_t seq) {
  return (!last_seen || seq > *last_seen) ? SeqDecision::accept
                                          : SeqDecision::stale;
}

std::string state_digest(
    const SeatMap& seats,
    const std::map<std::string, ElementState, std::less<>>& elements) {
  json seat_doc = json::object();
  for (const auto& [vp, holder] : seats) seat_doc[vp] = nullable(holder);
  json el_doc = json::object();
  for (const auto& [id, st] : elements) el_doc[id] = state_to_json(st);
  const std::string canonical =
      json{{"seats", std::move(seat_doc)}, {"elements", std::move(el_doc)}}.dump();

  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace vrmeet
