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

#include <cstring>
#include <deque>
#include <fstream>
#include <memory>
#include <sstream>

#include "vrmeet/errors.hpp"
#include "vrmeet/harness.hpp"
#include "vrmeet/vrmeet.h"

struct vrm_room {
  vrmeet::Room room;
};

struct vrm_server {
  vrmeet::SessionServer server;
  vrmeet::Room room;
  vrmeet::GestureConfig gesture;
  std::unique_ptr<std::ofstream> log;
  std::deque<vrmeet::Outbound> pending;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_subject;
thread_local std::size_t g_offset = 0;

vrm_status status_of(vrmeet::Errc code) {
  using vrmeet::Errc;
  switch (code) {
    case Errc::invalid_direction: return VRM_ERR_INVALID_DIRECTION;
    case Errc::out_of_range: return VRM_ERR_OUT_OF_RANGE;
    case Errc::syntax: return VRM_ERR_SYNTAX;
    case Errc::schema: return VRM_ERR_SCHEMA;
    case Errc::duplicate_id: return VRM_ERR_DUPLICATE_ID;
    case Errc::unknown_id: return VRM_ERR_UNKNOWN_ID;
    case Errc::unknown_type: return VRM_ERR_UNKNOWN_TYPE;
    case Errc::encoding: return VRM_ERR_ENCODING;
    case Errc::empty_input: return VRM_ERR_EMPTY_INPUT;
    case Errc::disconnected_graph: return VRM_ERR_DISCONNECTED_GRAPH;
    case Errc::invalid_input: return VRM_ERR_INVALID_INPUT;
    case Errc::io: return VRM_ERR_IO;
    case Errc::scenario: return VRM_ERR_SCENARIO;
    case Errc::replay_divergence: return VRM_ERR_REPLAY_DIVERGENCE;
  }
  return VRM_ERR_INTERNAL;
}

vrm_status fail(vrm_status s, std::string message, std::string subject = {},
                std::size_t offset = 0) {
  g_error = std::move(message);
  g_subject = std::move(subject);
  g_offset = offset;
  return s;
}

template <typename F>
vrm_status guarded(F&& f) {
  try {
    f();
    g_error.clear();
    g_subject.clear();
    g_offset = 0;
    return VRM_OK;
  } catch (const vrmeet::Error& e) {
    return fail(status_of(e.code()), e.what(), e.subject(), e.offset());
  } catch (const std::bad_alloc&) {
    return fail(VRM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VRM_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

#define VRM_REQUIRE(cond)                                                 \
  do {                                                                    \
    if (!(cond)) return fail(VRM_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

std::string read_all(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vrmeet::Error(vrmeet::Errc::io, std::string("cannot read '") + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void move_outbox(vrm_server* s) {
  for (auto& o : s->server.drain()) s->pending.push_back(std::move(o));
}

}  // namespace

extern "C" {

const char* vrm_last_error(void) { return g_error.c_str(); }
const char* vrm_last_error_subject(void) { return g_subject.c_str(); }
size_t vrm_last_error_offset(void) { return g_offset; }

const char* vrm_status_name(vrm_status status) {
  switch (status) {
    case VRM_OK: return "ok";
    case VRM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case VRM_ERR_IO: return "io";
    case VRM_ERR_SYNTAX: return "syntax";
    case VRM_ERR_SCHEMA: return "schema";
    case VRM_ERR_DUPLICATE_ID: return "duplicate_id";
    case VRM_ERR_UNKNOWN_ID: return "unknown_id";
    case VRM_ERR_UNKNOWN_TYPE: return "unknown_type";
    case VRM_ERR_ENCODING: return "encoding";
    case VRM_ERR_EMPTY_INPUT: return "empty_input";
    case VRM_ERR_DISCONNECTED_GRAPH: return "disconnected_graph";
    case VRM_ERR_INVALID_INPUT: return "invalid_input";
    case VRM_ERR_SCENARIO: return "scenario";
    case VRM_ERR_REPLAY_DIVERGENCE: return "replay_divergence";
    case VRM_ERR_OUT_OF_RANGE: return "out_of_range";
    case VRM_ERR_INVALID_DIRECTION: return "invalid_direction";
    case VRM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void vrm_string_free(char* s) { std::free(s); }

const char* vrm_version(void) { return "0.1.0"; }
uint16_t vrm_default_port(void) { return vrmeet::kDefaultPort; }
const char* vrm_session_path(void) { return vrmeet::kSessionPath.data(); }

vrm_status vrm_room_load(const char* path, vrm_room** out) {
  VRM_REQUIRE(path && out);
  return guarded([&] { *out = new vrm_room{vrmeet::load_manifest(path)}; });
}

vrm_status vrm_room_parse(const char* json, size_t len, vrm_room** out) {
  VRM_REQUIRE(json && out);
  return guarded(
      [&] { *out = new vrm_room{vrmeet::parse_manifest(std::string_view(json, len))}; });
}

void vrm_room_free(vrm_room* room) { delete room; }

vrm_status vrm_room_id(const vrm_room* room, char** out) {
  VRM_REQUIRE(room && out);
  return guarded([&] { *out = dup_string(room->room.room_id); });
}

vrm_status vrm_room_serialize(const vrm_room* room, char** out) {
  VRM_REQUIRE(room && out);
  return guarded([&] { *out = dup_string(vrmeet::serialize_manifest(room->room)); });
}

vrm_status vrm_server_create(const vrm_room* room, const char* gesture_json,
                             vrm_server** out) {
  VRM_REQUIRE(room && out);
  return guarded([&] {
    vrmeet::GestureConfig g;
    if (gesture_json) g = vrmeet::parse_gesture_config(gesture_json);
    *out = new vrm_server{vrmeet::SessionServer(room->room, vrmeet::ServerOptions{g}),
                          room->room, g, nullptr, {}};
  });
}

void vrm_server_free(vrm_server* server) {
  if (server && server->log) vrm_server_set_log_file(server, nullptr);
  delete server;
}

vrm_status vrm_server_set_log_file(vrm_server* server, const char* path) {
  VRM_REQUIRE(server);
  return guarded([&] {
    if (server->log) {
      vrmeet::write_log_trailer(*server->log, server->server.digest());
      server->server.set_event_log(nullptr);
      server->log.reset();
    }
    if (!path) return;
    auto log = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*log) {
      throw vrmeet::Error(vrmeet::Errc::io, std::string("cannot write '") + path + "'", path);
    }
    vrmeet::write_log_header(*log, server->room, server->gesture);
    server->log = std::move(log);
    server->server.set_event_log(server->log.get());
  });
}

vrm_status vrm_server_open(vrm_server* server, uint64_t conn, double now_ms) {
  VRM_REQUIRE(server);
  return guarded([&] {
    server->server.open(conn, now_ms);
    move_outbox(server);
  });
}

vrm_status vrm_server_receive(vrm_server* server, uint64_t conn, const char* line,
                              size_t len, double now_ms) {
  VRM_REQUIRE(server && (line || len == 0));
  return guarded([&] {
    std::string_view v(line ? line : "", len);
    if (!v.empty() && v.back() == '\n') v.remove_suffix(1);
    if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
    server->server.receive_line(conn, v, now_ms);
    move_outbox(server);
    if (server->log) server->log->flush();
  });
}

vrm_status vrm_server_close(vrm_server* server, uint64_t conn, double now_ms) {
  VRM_REQUIRE(server);
  return guarded([&] {
    server->server.close(conn, now_ms);
    move_outbox(server);
  });
}

vrm_status vrm_server_tick(vrm_server* server, double now_ms) {
  VRM_REQUIRE(server);
  return guarded([&] {
    server->server.tick(now_ms);
    move_outbox(server);
  });
}

int vrm_server_poll(vrm_server* server, uint64_t* conn, char** line, int* close_after) {
  if (!server || !conn || !line || !close_after || server->pending.empty()) return 0;
  auto& o = server->pending.front();
  *line = dup_string(o.line);
  *conn = o.conn;
  *close_after = o.close ? 1 : 0;
  server->pending.pop_front();
  return 1;
}

vrm_status vrm_server_digest(const vrm_server* server, char** out) {
  VRM_REQUIRE(server && out);
  return guarded([&] { *out = dup_string(server->server.digest()); });
}

vrm_status vrm_simulate(const char* scenario_path, const char* log_path, char** report) {
  VRM_REQUIRE(scenario_path && report);
  return guarded([&] {
    const auto scenario = vrmeet::load_scenario(scenario_path);
    std::ofstream log;
    vrmeet::SimulationOptions opts;
    if (log_path) {
      log.open(log_path, std::ios::binary | std::ios::trunc);
      if (!log) {
        throw vrmeet::Error(vrmeet::Errc::io, std::string("cannot write '") + log_path + "'",
                            log_path);
      }
      opts.event_log = &log;
    }
    *report = dup_string(vrmeet::serialize_report(vrmeet::run_scenario(scenario, opts)));
  });
}

vrm_status vrm_calibrate(const char* measurements_path, const char* manifest_path,
                         char** manifest_out, double* residual_rms) {
  VRM_REQUIRE(measurements_path && manifest_path && manifest_out);
  return guarded([&] {
    const auto measurements = vrmeet::parse_measurements(read_all(measurements_path));
    const auto room = vrmeet::load_manifest(manifest_path);
    const auto outcome = vrmeet::calibrate_room(room, measurements);
    *manifest_out = dup_string(vrmeet::serialize_manifest(outcome.room));
    if (residual_rms) *residual_rms = outcome.result.residual_rms;
  });
}

vrm_status vrm_validate(const char* manifest_path, int* exit_code, char** listing) {
  VRM_REQUIRE(manifest_path && exit_code && listing);
  return guarded([&] {
    const auto outcome = vrmeet::validate_manifest_file(manifest_path);
    *listing = dup_string(vrmeet::format_violations(outcome.violations));
    *exit_code = outcome.exit_code;
  });
}

vrm_status vrm_replay(const char* log_path, const char* manifest_path, char** final_digest,
                      uint64_t* lines) {
  VRM_REQUIRE(log_path && final_digest);
  return guarded([&] {
    std::optional<vrmeet::Room> fallback;
    if (manifest_path) fallback = vrmeet::load_manifest(manifest_path);
    const auto r = vrmeet::replay_log_file(log_path, fallback);
    *final_digest = dup_string(r.final_digest);
    if (lines) *lines = r.lines;
  });
}

}  // extern "C"
