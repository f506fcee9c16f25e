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

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vrmeet/errors.hpp"
#include "vrmeet/harness.hpp"

namespace vrmeet {
namespace {

std::string gesture_to_json(const GestureConfig& g) {
  return nlohmann::json{{"swipe_min_speed", g.swipe_min_speed},
                        {"swipe_min_duration", g.swipe_min_duration},
                        {"swipe_min_displacement", g.swipe_min_displacement},
                        {"dominance_ratio", g.dominance_ratio},
                        {"palm_cone_half_angle", g.palm_cone_half_angle},
                        {"gaze_margin", g.gaze_margin},
                        {"window", g.window},
                        {"swipe_left_advances", g.swipe_left_advances}}
      .dump();
}

std::string compact_manifest(const Room& room) {
  return nlohmann::json::parse(serialize_manifest(room)).dump();
}

// Splits off the next space-delimited token.
std::string_view take_token(std::string_view& rest) {
  const auto sp = rest.find(' ');
  std::string_view tok = rest.substr(0, sp);
  rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
  return tok;
}

std::optional<double> parse_time(std::string_view s) {
  if (s.empty()) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(s);
    if (j.is_number()) return j.get<double>();
  } catch (const nlohmann::json::exception&) {
  }
  return std::nullopt;
}

std::optional<ConnectionId> parse_conn(std::string_view s) {
  ConnectionId v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void diverged(std::size_t line_no, const std::string& what) {
  throw Error(Errc::replay_divergence,
              "replay diverged at line " + std::to_string(line_no) + ": " + what, {},
              line_no);
}

}  // namespace

void write_log_header(std::ostream& out, const Room& room, const GestureConfig& gesture) {
  out << "ROOM " << compact_manifest(room) << '\n';
  out << "GESTURE " << gesture_to_json(gesture) << '\n';
}

void write_log_trailer(std::ostream& out, const std::string& digest) {
  out << "DIGEST " << digest << '\n';
}

ReplayResult replay_log(std::istream& log, const std::optional<Room>& fallback_room) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(log, line);) lines.push_back(std::move(line));

  std::size_t next = 0;
  std::optional<Room> room;
  GestureConfig gesture;
  bool has_gesture = false;
  if (next < lines.size() && lines[next].starts_with("ROOM ")) {
    room = parse_manifest(std::string_view(lines[next]).substr(5));
    ++next;
  }
  const bool has_room = room.has_value();
  if (next < lines.size() && lines[next].starts_with("GESTURE ")) {
    gesture = parse_gesture_config(std::string_view(lines[next]).substr(8));
    has_gesture = true;
    ++next;
  }
  if (!room) {
    if (!fallback_room) {
      throw Error(Errc::empty_input, "event log has no ROOM header and no manifest was given");
    }
    room = *fallback_room;
  }

  std::ostringstream regenerated;
  if (has_room) {
    regenerated << "ROOM " << compact_manifest(*room) << '\n';
  }
  if (has_gesture) regenerated << "GESTURE " << gesture_to_json(gesture) << '\n';
  SessionServer server(*room, ServerOptions{gesture});
  server.set_event_log(&regenerated);

  ReplayResult result;
  for (std::size_t i = next; i < lines.size(); ++i) {
    std::string_view rest = lines[i];
    const std::string_view tag = take_token(rest);
    if (tag == "OPEN" || tag == "CLOSE") {
      const auto t = parse_time(take_token(rest));
      const auto conn = parse_conn(rest);
      if (!t || !conn) diverged(i + 1, "malformed " + std::string(tag) + " line");
      if (tag == "OPEN") {
        server.open(*conn, *t);
      } else {
        server.close(*conn, *t);
      }
    } else if (tag == "IN") {
      const auto t = parse_time(take_token(rest));
      const auto conn = parse_conn(take_token(rest));
      if (!t || !conn) diverged(i + 1, "malformed IN line");
      server.receive_line(*conn, rest, *t);
    } else if (tag == "TICK") {
      const auto t = parse_time(rest);
      if (!t) diverged(i + 1, "malformed TICK line");
      server.tick(*t);
      ++result.ticks;
    } else if (tag == "DIGEST") {
      write_log_trailer(regenerated, server.digest());
    }
    // OUT / END lines are produced by the server itself; anything else is
    // caught by the comparison below.
    server.drain();
  }

  std::istringstream again(regenerated.str());
  std::size_t n = 0;
  for (std::string line; std::getline(again, line); ++n) {
    if (n >= lines.size()) diverged(n + 1, "log ends early; expected: " + line);
    if (lines[n] != line) diverged(n + 1, "expected: " + line);
  }
  if (n < lines.size()) diverged(n + 1, "unexpected line: " + lines[n]);

  result.final_digest = server.digest();
  result.lines = lines.size();
  return result;
}

ReplayResult replay_log_file(const std::filesystem::path& path,
                             const std::optional<Room>& fallback_room) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read log '" + path.string() + "'", path.string());
  return replay_log(in, fallback_room);
}

}  // namespace vrmeet
