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

#include "vrmeet/server.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "vrmeet/errors.hpp"

namespace vrmeet {

ServerState::ServerState(Room r) : room(std::move(r)) {
  for (const auto& vp : room.viewpoints) seat_map.emplace(vp.id, std::nullopt);
  for (const auto& el : room.elements) {
    ElementState st = el.content_state;
    st.version = 0;
    st.slide_index = 0;
    element_states.emplace(el.id, std::move(st));
  }
}

std::vector<std::string> ServerState::invariant_violations() const {
  std::vector<std::string> out;
  std::map<std::string, int> seats_per_session;
  for (const auto& [seat, holder] : seat_map) {
    if (!holder) continue;
    const auto it = sessions.find(*holder);
    if (it == sessions.end()) {
      out.push_back("seat " + seat + " held by unknown session " + *holder);
      continue;
    }
    if (it->second.seat_id != seat) {
      out.push_back("seat " + seat + " holder " + *holder +
                    " believes it sits elsewhere");
    }
    if (++seats_per_session[*holder] > 1) {
      out.push_back("session " + *holder + " occupies more than one seat");
    }
  }
  for (const auto& [sid, rec] : sessions) {
    if (!rec.seat_id) continue;
    const auto it = seat_map.find(*rec.seat_id);
    if (it == seat_map.end() || it->second != sid) {
      out.push_back("session " + sid + " claims seat " + *rec.seat_id +
                    " it does not hold");
    }
  }
  for (const auto& [id, st] : element_states) {
    if (st.slide_count == 0 || st.slide_index >= st.slide_count) {
      out.push_back("element " + id + " slide index out of range");
    }
  }
  return out;
}

Snapshot make_snapshot(const ServerState& state) {
  Snapshot snap;
  snap.room_id = state.room.room_id;
  snap.seats = state.seat_map;
  for (const auto& [sid, rec] : state.sessions) {
    if (!rec.seat_id) continue;
    snap.users.push_back({sid, rec.display_name, rec.seat_id, rec.last_head});
  }
  for (const auto& el : state.room.elements) {
    snap.elements.push_back({el.id, state.element_states.at(el.id)});
  }
  return snap;
}

namespace {

void broadcast(const ServerState& state, const Message& body,
               std::vector<Addressed>& out, const std::string* except = nullptr) {
  for (const auto& [sid, rec] : state.sessions) {
    if (except && sid == *except) continue;
    out.push_back({sid, body});
  }
}

void reply_error(const std::string& session, std::string code, std::string detail,
                 std::vector<Addressed>& out) {
  out.push_back({session, ErrorMsg{std::move(code), std::move(detail)}});
}

}  // namespace

void handle_seat_request(ServerState& state, const std::string& session,
                         const SeatRequest& req, std::vector<Addressed>& out) {
  auto& rec = state.sessions.at(session);
  const auto seat = state.seat_map.find(req.seat_id);
  if (seat == state.seat_map.end()) {
    reply_error(session, "unknown_seat", "no seat '" + req.seat_id + "'", out);
    return;
  }
  if (seat->second && *seat->second != session) {
    out.push_back({session, SeatUpdate{session, req.seat_id, false}});
    return;
  }
  if (rec.seat_id && *rec.seat_id != req.seat_id) {
    state.seat_map.at(*rec.seat_id) = std::nullopt;
  }
  seat->second = session;
  rec.seat_id = req.seat_id;
  // Announce the avatar from its new seat on the next tick.
  rec.pose_dirty = true;
  rec.dirty_hands.clear();
  for (const auto& [hand, frame] : rec.last_hands) rec.dirty_hands.push_back(hand);
  broadcast(state, SeatUpdate{session, req.seat_id, true}, out);
}

void handle_element_command(ServerState& state, const std::string& session,
                            const ElementCommand& cmd, std::vector<Addressed>& out) {
  const auto& rec = state.sessions.at(session);
  if (!rec.seat_id) {
    reply_error(session, "not_seated", "take a seat before commanding elements", out);
    return;
  }
  const auto it = state.element_states.find(cmd.element_id);
  if (it == state.element_states.end()) {
    reply_error(session, "unknown_element", "no element '" + cmd.element_id + "'",
                out);
    return;
  }
  ElementState next = it->second;
  const std::uint64_t last = next.slide_count - 1;
  switch (cmd.command.op) {
    case SlideOp::next_slide:
      next.slide_index = std::min(next.slide_index + 1, last);
      break;
    case SlideOp::prev_slide:
      if (next.slide_index > 0) --next.slide_index;
      break;
    case SlideOp::set_slide:
      if (cmd.command.slide > last) {
        reply_error(session, "slide_out_of_range",
                    "slide " + std::to_string(cmd.command.slide) + " of " +
                        std::to_string(next.slide_count),
                    out);
        return;
      }
      next.slide_index = cmd.command.slide;
      break;
    case SlideOp::set_content:
      if (cmd.command.content_id != next.content_id) {
        next.content_id = cmd.command.content_id;
        next.slide_index = 0;
      }
      break;
  }
  if (next == it->second) return;  // no-op: no version bump, no broadcast
  next.version = it->second.version + 1;
  it->second = next;
  broadcast(state, ElementStateMsg{cmd.element_id, next}, out);
}

void handle_pose_update(ServerState& state, const std::string& session,
                        std::uint64_t seq, const PoseUpdate& upd) {
  auto& rec = state.sessions.at(session);
  if (accept_sequence(rec.last_pose_seq, seq) == SeqDecision::stale) return;
  rec.last_pose_seq = seq;
  rec.last_head = upd.head;
  rec.pose_dirty = true;
}

void handle_hand_update(ServerState& state, const std::string& session,
                        std::uint64_t seq, const HandUpdate& upd) {
  auto& rec = state.sessions.at(session);
  if (accept_sequence(rec.last_hand_seq, seq) == SeqDecision::stale) return;
  rec.last_hand_seq = seq;
  for (const auto& frame : upd.frames) {
    rec.last_hands[frame.hand] = frame;
    if (std::find(rec.dirty_hands.begin(), rec.dirty_hands.end(), frame.hand) ==
        rec.dirty_hands.end()) {
      rec.dirty_hands.push_back(frame.hand);
    }
  }
}

void handle_gesture_event(ServerState& state, const std::string& session,
                          const GestureEvent& ev, const GestureConfig& cfg,
                          std::vector<Addressed>& out) {
  const auto cmd = dispatch(to_swipe(ev.kind), ev.gaze_element, state.room, cfg);
  if (cmd) handle_element_command(state, session, *cmd, out);
}

void handle_disconnect(ServerState& state, const std::string& session,
                       std::vector<Addressed>& out) {
  const auto it = state.sessions.find(session);
  if (it == state.sessions.end()) return;
  const auto seat = it->second.seat_id;
  state.sessions.erase(it);
  if (seat) {
    state.seat_map.at(*seat) = std::nullopt;
    broadcast(state, SeatUpdate{session, std::nullopt, true}, out);
  }
}

void tick(ServerState& state, std::vector<Addressed>& out) {
  for (auto& [sid, rec] : state.sessions) {
    if (!rec.seat_id) continue;
    if (rec.pose_dirty) {
      broadcast(state, PoseUpdate{rec.last_head, sid, rec.seat_id}, out, &sid);
      rec.pose_dirty = false;
    }
    if (!rec.dirty_hands.empty()) {
      std::sort(rec.dirty_hands.begin(), rec.dirty_hands.end());
      HandUpdate upd{{}, sid, rec.seat_id};
      for (Hand h : rec.dirty_hands) upd.frames.push_back(rec.last_hands.at(h));
      broadcast(state, upd, out, &sid);
      rec.dirty_hands.clear();
    }
  }
  ++state.tick_count;
}

std::string format_log_number(double v) { return nlohmann::json(v).dump(); }

SessionServer::SessionServer(Room room, ServerOptions options)
    : state_(std::move(room)), options_(std::move(options)) {
  validate(options_.gesture);
}

std::optional<std::string> SessionServer::session_of(ConnectionId conn) const {
  const auto it = connections_.find(conn);
  if (it == connections_.end()) return std::nullopt;
  return it->second.session_id;
}

void SessionServer::log_line(const std::string& line) {
  if (log_) *log_ << line << '\n';
}

void SessionServer::open(ConnectionId conn, double now_ms) {
  now_ms_ = now_ms;
  log_line("OPEN " + format_log_number(now_ms) + " " + std::to_string(conn));
  connections_.try_emplace(conn);
}

void SessionServer::receive_line(ConnectionId conn, std::string_view line,
                                 double now_ms) {
  now_ms_ = now_ms;
  log_line("IN " + format_log_number(now_ms) + " " + std::to_string(conn) + " " +
           std::string(line));
  connections_.try_emplace(conn);
  Envelope env;
  try {
    env = decode_message(line);
  } catch (const Error& e) {
    send_error(conn, "malformed", e.what());
    return;
  }
  handle(conn, env);
}

void SessionServer::close(ConnectionId conn, double now_ms) {
  now_ms_ = now_ms;
  log_line("CLOSE " + format_log_number(now_ms) + " " + std::to_string(conn));
  drop_connection(conn);
}

void SessionServer::tick(double now_ms) {
  now_ms_ = now_ms;
  log_line("TICK " + format_log_number(now_ms));
  std::vector<Addressed> out;
  vrmeet::tick(state_, out);
  deliver(out);
}

std::vector<Outbound> SessionServer::drain() {
  std::vector<Outbound> out;
  out.swap(outbox_);
  return out;
}

void SessionServer::handle(ConnectionId conn, const Envelope& env) {
  auto& c = connections_.at(conn);
  std::vector<Addressed> out;

  if (const auto* hello = std::get_if<ClientHello>(&env.body)) {
    if (c.session_id) {
      send_error(conn, "already_welcomed", "connection already has a session",
                 true);
      drop_connection(conn);
      return;
    }
    const std::string sid = "s" + std::to_string(++state_.sessions_created);
    SessionRecord rec;
    rec.conn = conn;
    rec.display_name = hello->display_name;
    state_.sessions.emplace(sid, std::move(rec));
    c.session_id = sid;
    emit(conn, ServerWelcome{sid, make_snapshot(state_)});
    return;
  }

  if (!c.session_id) {
    send_error(conn, "not_welcomed", "send client_hello first");
    return;
  }
  const std::string sid = *c.session_id;

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SeatRequest>) {
          handle_seat_request(state_, sid, m, out);
        } else if constexpr (std::is_same_v<T, ElementCommand>) {
          handle_element_command(state_, sid, m, out);
        } else if constexpr (std::is_same_v<T, PoseUpdate>) {
          handle_pose_update(state_, sid, env.seq, m);
        } else if constexpr (std::is_same_v<T, HandUpdate>) {
          handle_hand_update(state_, sid, env.seq, m);
        } else if constexpr (std::is_same_v<T, GestureEvent>) {
          handle_gesture_event(state_, sid, m, options_.gesture, out);
        } else if constexpr (std::is_same_v<T, Leave>) {
          // handled below
        } else {
          reply_error(sid, "unexpected_message",
                      std::string(env.msg_type()) + " is server-to-client only",
                      out);
        }
      },
      env.body);
  deliver(out);

  if (std::holds_alternative<Leave>(env.body)) {
    log_line("END " + std::to_string(conn));
    outbox_.push_back({conn, {}, true});
    drop_connection(conn);
  }
}

void SessionServer::send_error(ConnectionId conn, std::string code,
                               std::string detail, bool close_after) {
  emit(conn, ErrorMsg{std::move(code), std::move(detail)}, close_after);
}

void SessionServer::deliver(std::vector<Addressed>& addressed) {
  for (auto& a : addressed) {
    const auto it = state_.sessions.find(a.session_id);
    if (it == state_.sessions.end()) continue;
    emit(it->second.conn, std::move(a.body));
  }
  addressed.clear();
}

void SessionServer::emit(ConnectionId conn, Message body, bool close_after) {
  auto& c = connections_.at(conn);
  Envelope env;
  env.seq = c.next_seq++;
  env.session_id = c.session_id.value_or("");
  env.ts_ms = now_ms_;
  env.body = std::move(body);
  std::string line = encode_message(env);
  log_line("OUT " + std::to_string(conn) + " " +
           line.substr(0, line.size() - 1));
  outbox_.push_back({conn, std::move(line), close_after});
  if (close_after) log_line("END " + std::to_string(conn));
}

void SessionServer::drop_connection(ConnectionId conn) {
  const auto it = connections_.find(conn);
  if (it == connections_.end()) return;
  const auto sid = it->second.session_id;
  connections_.erase(it);
  if (!sid) return;
  std::vector<Addressed> out;
  handle_disconnect(state_, *sid, out);
  deliver(out);
}

}  // namespace vrmeet
