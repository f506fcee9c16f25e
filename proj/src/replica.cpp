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

#include "vrmeet/replica.hpp"

namespace vrmeet {

std::optional<std::string> ClientReplica::own_seat() const {
  for (const auto& [seat, holder] : seats_) {
    if (holder && *holder == session_id_) return seat;
  }
  return std::nullopt;
}

std::map<std::string, RemoteUser, std::less<>> ClientReplica::users_except(
    const std::set<std::string>& excluded) const {
  std::map<std::string, RemoteUser, std::less<>> out;
  for (const auto& [sid, user] : users_) {
    if (!excluded.contains(sid)) out.emplace(sid, user);
  }
  return out;
}

void ClientReplica::apply_snapshot(const Snapshot& snap) {
  room_id_ = snap.room_id;
  seats_ = snap.seats;
  users_.clear();
  for (const auto& u : snap.users) {
    users_[u.session_id] = RemoteUser{u.seat_id, u.head, {}};
  }
  elements_.clear();
  for (const auto& e : snap.elements) set_element(e.id, e.state);
}

void ClientReplica::set_element(const std::string& id, const ElementState& st) {
  elements_[id] = st;
  version_history_[id].push_back(st.version);
}

void ClientReplica::apply(const Envelope& env) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ServerWelcome>) {
          session_id_ = m.session_id;
          apply_snapshot(m.snapshot);
        } else if constexpr (std::is_same_v<T, Snapshot>) {
          apply_snapshot(m);
        } else if constexpr (std::is_same_v<T, SeatUpdate>) {
          if (!m.granted) {
            ++seat_denials_;
            return;
          }
          for (auto& [seat, holder] : seats_) {
            if (holder == m.session_id) holder.reset();
          }
          if (m.seat_id) {
            seats_[*m.seat_id] = m.session_id;
            users_[m.session_id].seat_id = m.seat_id;
          } else {
            users_.erase(m.session_id);
          }
        } else if constexpr (std::is_same_v<T, PoseUpdate>) {
          if (!m.session_id) return;
          auto& u = users_[*m.session_id];
          u.head = m.head;
          if (m.seat_id) u.seat_id = m.seat_id;
          ++pose_relays_[*m.session_id];
        } else if constexpr (std::is_same_v<T, HandUpdate>) {
          if (!m.session_id) return;
          auto& u = users_[*m.session_id];
          for (const auto& f : m.frames) u.hands[f.hand] = f;
          if (m.seat_id) u.seat_id = m.seat_id;
          ++hand_relays_[*m.session_id];
        } else if constexpr (std::is_same_v<T, ElementStateMsg>) {
          const auto it = elements_.find(m.element_id);
          if (it != elements_.end() && m.state.version <= it->second.version) return;
          set_element(m.element_id, m.state);
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          errors_.push_back(m);
        }
      },
      env.body);
}

}  // namespace vrmeet
