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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vrmeet/protocol.hpp"

namespace vrmeet {

struct RemoteUser {
  std::optional<std::string> seat_id;
  Pose head;
  std::map<Hand, HandFrame> hands;
  friend bool operator==(const RemoteUser&, const RemoteUser&) = default;
};

// Client-side mirror of server-broadcast state. Applies only what the server
// sends; never updates optimistically.
class ClientReplica {
 public:
  void apply(const Envelope& env);

  bool welcomed() const { return !session_id_.empty(); }
  const std::string& session_id() const { return session_id_; }
  const std::string& room_id() const { return room_id_; }
  const SeatMap& seats() const { return seats_; }
  const std::map<std::string, ElementState, std::less<>>& elements() const {
    return elements_;
  }
  const std::map<std::string, RemoteUser, std::less<>>& users() const { return users_; }
  std::optional<std::string> own_seat() const;

  std::string digest() const { return state_digest(seats_, elements_); }

  const std::vector<ErrorMsg>& errors() const { return errors_; }
  std::uint64_t seat_denials() const { return seat_denials_; }
  // Every element version this replica has displayed, in arrival order.
  const std::map<std::string, std::vector<std::uint64_t>>& version_history() const {
    return version_history_;
  }
  // Number of pose/hand relays received, keyed by owner session.
  const std::map<std::string, std::uint64_t>& pose_relays() const { return pose_relays_; }
  const std::map<std::string, std::uint64_t>& hand_relays() const { return hand_relays_; }

  // Users other than those listed, for comparing two replicas' view of the
  // rest of the room.
  std::map<std::string, RemoteUser, std::less<>> users_except(
      const std::set<std::string>& excluded) const;

 private:
  void apply_snapshot(const Snapshot& snap);
  void set_element(const std::string& id, const ElementState& st);

  std::string session_id_;
  std::string room_id_;
  SeatMap seats_;
  std::map<std::string, ElementState, std::less<>> elements_;
  std::map<std::string, RemoteUser, std::less<>> users_;
  std::vector<ErrorMsg> errors_;
  std::uint64_t seat_denials_ = 0;
  std::map<std::string, std::vector<std::uint64_t>> version_history_;
  std::map<std::string, std::uint64_t> pose_relays_;
  std::map<std::string, std::uint64_t> hand_relays_;
};

}  // namespace vrmeet
