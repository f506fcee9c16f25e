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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vrmeet/gesture.hpp"
#include "vrmeet/protocol.hpp"
#include "vrmeet/room.hpp"

namespace vrmeet {

using ConnectionId = std::uint64_t;

struct SessionRecord {
  ConnectionId conn = 0;
  std::string display_name;
  std::optional<std::string> seat_id;
  Pose last_head;
  std::map<Hand, HandFrame> last_hands;
  std::optional<std::uint64_t> last_pose_seq;
  std::optional<std::uint64_t> last_hand_seq;
  bool pose_dirty = false;
  std::vector<Hand> dirty_hands;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

struct ServerState {
  Room room;
  std::map<std::string, SessionRecord, std::less<>> sessions;
  SeatMap seat_map;
  std::map<std::string, ElementState, std::less<>> element_states;
  std::uint64_t tick_count = 0;
  std::uint64_t sessions_created = 0;

  explicit ServerState(Room r);

  std::string digest() const { return state_digest(seat_map, element_states); }

  // Seat exclusivity and referential integrity; empty when consistent.
  std::vector<std::string> invariant_violations() const;

  friend bool operator==(const ServerState&, const ServerState&) = default;
};

Snapshot make_snapshot(const ServerState& state);

// A message addressed to one session, before the transport assigns the
// envelope header.
struct Addressed {
  std::string session_id;
  Message body;
};

// Pure handlers. Each mutates `state` and appends the messages it wants
// delivered; none of them touch connections.
void handle_seat_request(ServerState& state, const std::string& session,
                         const SeatRequest& req, std::vector<Addressed>& out);
void handle_element_command(ServerState& state, const std::string& session,
                            const ElementCommand& cmd, std::vector<Addressed>& out);
void handle_pose_update(ServerState& state, const std::string& session,
                        std::uint64_t seq, const PoseUpdate& upd);
void handle_hand_update(ServerState& state, const std::string& session,
                        std::uint64_t seq, const HandUpdate& upd);
void handle_gesture_event(ServerState& state, const std::string& session,
                          const GestureEvent& ev, const GestureConfig& cfg,
                          std::vector<Addressed>& out);
void handle_disconnect(ServerState& state, const std::string& session,
                       std::vector<Addressed>& out);
void tick(ServerState& state, std::vector<Addressed>& out);

// One outbound item for the transport. When `close` is set the transport
// must close the connection after writing `line` (which may be empty).
struct Outbound {
  ConnectionId conn = 0;
  std::string line;  // encoded envelope including '\n'
  bool close = false;
};

struct ServerOptions {
  GestureConfig gesture;
};

// Authoritative session engine. All calls must come from a single logical
// context; the transport serializes connection events into it. Every input
// and output is optionally written to an event log that `replay_log` can
// verify.
class SessionServer {
 public:
  explicit SessionServer(Room room, ServerOptions options = {});

  void open(ConnectionId conn, double now_ms);
  void receive_line(ConnectionId conn, std::string_view line, double now_ms);
  void close(ConnectionId conn, double now_ms);
  void tick(double now_ms);

  // Returns and clears everything queued for delivery.
  std::vector<Outbound> drain();

  const ServerState& state() const { return state_; }
  std::string digest() const { return state_.digest(); }
  std::optional<std::string> session_of(ConnectionId conn) const;

  // Not owned; pass nullptr to stop logging.
  void set_event_log(std::ostream* log) { log_ = log; }

 private:
  struct Connection {
    std::optional<std::string> session_id;
    std::uint64_t next_seq = 0;
  };

  void handle(ConnectionId conn, const Envelope& env);
  void send_error(ConnectionId conn, std::string code, std::string detail,
                  bool close_after = false);
  void deliver(std::vector<Addressed>& addressed);
  void emit(ConnectionId conn, Message body, bool close_after = false);
  void drop_connection(ConnectionId conn);
  void log_line(const std::string& line);

  ServerState state_;
  ServerOptions options_;
  std::map<ConnectionId, Connection> connections_;
  std::vector<Outbound> outbox_;
  double now_ms_ = 0.0;
  std::ostream* log_ = nullptr;
};

// Formats a time value the way the event log stores it (shortest
// round-trip decimal).
std::string format_log_number(double v);

}  // namespace vrmeet
