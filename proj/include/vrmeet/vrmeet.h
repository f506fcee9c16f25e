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

/* Stable C interface to the vrmeet session engine. */
#ifndef VRMEET_VRMEET_H
#define VRMEET_VRMEET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VRM_API __declspec(dllexport)
#else
#define VRM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vrm_status {
  VRM_OK = 0,
  VRM_ERR_INVALID_ARGUMENT = 1, /* null pointer or bad enum */
  VRM_ERR_IO = 2,
  VRM_ERR_SYNTAX = 3,
  VRM_ERR_SCHEMA = 4,
  VRM_ERR_DUPLICATE_ID = 5,
  VRM_ERR_UNKNOWN_ID = 6,
  VRM_ERR_UNKNOWN_TYPE = 7,
  VRM_ERR_ENCODING = 8,
  VRM_ERR_EMPTY_INPUT = 9,
  VRM_ERR_DISCONNECTED_GRAPH = 10,
  VRM_ERR_INVALID_INPUT = 11,
  VRM_ERR_SCENARIO = 12,
  VRM_ERR_REPLAY_DIVERGENCE = 13,
  VRM_ERR_OUT_OF_RANGE = 14,
  VRM_ERR_INVALID_DIRECTION = 15,
  VRM_ERR_INTERNAL = 99
} vrm_status;

typedef struct vrm_room vrm_room;
typedef struct vrm_server vrm_server;

/* Message for the last failing call on this thread; never NULL. */
VRM_API const char* vrm_last_error(void);
/* Offending id/field of the last failure, or "". */
VRM_API const char* vrm_last_error_subject(void);
/* Byte offset (syntax) or line number (replay) of the last failure. */
VRM_API size_t vrm_last_error_offset(void);
VRM_API const char* vrm_status_name(vrm_status status);

/* Strings returned through char** out-parameters are heap-allocated and must
 * be released with vrm_string_free. */
VRM_API void vrm_string_free(char* s);

VRM_API const char* vrm_version(void);
VRM_API uint16_t vrm_default_port(void);
VRM_API const char* vrm_session_path(void);

/* ---- rooms ---- */

VRM_API vrm_status vrm_room_load(const char* path, vrm_room** out);
VRM_API vrm_status vrm_room_parse(const char* json, size_t len, vrm_room** out);
VRM_API void vrm_room_free(vrm_room* room);
VRM_API vrm_status vrm_room_id(const vrm_room* room, char** out);
VRM_API vrm_status vrm_room_serialize(const vrm_room* room, char** out);

/* ---- authoritative server ---- */

/* Takes a copy of the room. gesture_json may be NULL for defaults. */
VRM_API vrm_status vrm_server_create(const vrm_room* room, const char* gesture_json,
                                     vrm_server** out);
VRM_API void vrm_server_free(vrm_server* server);

/* Starts an event log at path (truncating) beginning with the room and
 * gesture header lines. NULL stops logging and appends the digest trailer. */
VRM_API vrm_status vrm_server_set_log_file(vrm_server* server, const char* path);

VRM_API vrm_status vrm_server_open(vrm_server* server, uint64_t conn, double now_ms);
/* One NDJSON line, with or without its trailing newline. */
VRM_API vrm_status vrm_server_receive(vrm_server* server, uint64_t conn, const char* line,
                                      size_t len, double now_ms);
VRM_API vrm_status vrm_server_close(vrm_server* server, uint64_t conn, double now_ms);
VRM_API vrm_status vrm_server_tick(vrm_server* server, double now_ms);

/* Pops the next queued outbound item. Returns 1 and fills the outputs when
 * one was available, 0 when the queue is empty. `*line` (possibly "") must be
 * freed; when `*close_after` is nonzero the transport closes `conn` after
 * writing it. */
VRM_API int vrm_server_poll(vrm_server* server, uint64_t* conn, char** line,
                            int* close_after);

VRM_API vrm_status vrm_server_digest(const vrm_server* server, char** out);

/* ---- commands ---- */

/* Runs a scenario file; `report` receives the JSON metrics report. log_path
 * may be NULL. */
VRM_API vrm_status vrm_simulate(const char* scenario_path, const char* log_path,
                                char** report);

/* `manifest_out` receives the updated manifest JSON. */
VRM_API vrm_status vrm_calibrate(const char* measurements_path, const char* manifest_path,
                                 char** manifest_out, double* residual_rms);

/* `exit_code` is 0 iff no error-level violations; `listing` is one line per
 * violation. */
VRM_API vrm_status vrm_validate(const char* manifest_path, int* exit_code, char** listing);

/* manifest_path may be NULL; it is only consulted when the log has no room
 * header. */
VRM_API vrm_status vrm_replay(const char* log_path, const char* manifest_path,
                              char** final_digest, uint64_t* lines);

#ifdef __cplusplus
}
#endif

#endif /* VRMEET_VRMEET_H */
