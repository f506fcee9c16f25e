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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrmeet/calibration.hpp"
#include "vrmeet/gesture.hpp"
#include "vrmeet/protocol.hpp"
#include "vrmeet/room.hpp"
#include "vrmeet/server.hpp"

namespace vrmeet {

// ---- scenarios --------------------------------------------------------------

struct NetworkModel {
  double latency_ms = 0.0;
  double jitter_ms = 0.0;
  std::uint64_t seed = 0;
};

enum class ActionKind { join, sit, move_head, play_hand_trajectory, command, swipe, leave };

struct TrajectorySample {
  double t_ms = 0.0;  // relative to the action time
  HandFrame frame;
};

struct ScenarioAction {
  double at_ms = 0.0;
  ActionKind kind = ActionKind::join;
  std::string seat_id;                    // sit
  Pose pose;                              // move_head, seat frame
  std::string trajectory_file;            // play_hand_trajectory
  std::vector<TrajectorySample> trajectory;
  std::string element_id;                 // command
  SlideCommand command;                   // command
  Swipe swipe = Swipe::left;              // swipe
  bool abrupt = false;                    // leave: drop the connection
                                          // instead of sending Leave
};

struct ScenarioClient {
  std::string name;
  std::vector<ScenarioAction> actions;
};

struct Scenario {
  std::filesystem::path manifest_ref;
  NetworkModel network;
  double tick_hz = 20.0;
  GestureConfig gesture;
  std::vector<ScenarioClient> clients;

  double tick_period_ms() const { return 1000.0 / tick_hz; }
};

// Relative manifest and trajectory paths resolve against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Throws Errc::scenario for unknown seats/elements, decreasing timestamps,
// or invalid network parameters.
void validate_scenario(const Scenario& s, const Room& room);

// Right-hand palm sweep along X at 1.5 m/s for 240 ms, sampled at 100 Hz.
std::vector<TrajectorySample> synthetic_swipe(Swipe direction);
// A tracked hand with 20 joints laid out in the palm frame.
HandFrame synthetic_hand(Hand hand, const Pose& palm);

// ---- metrics ----------------------------------------------------------------

struct CommandConvergence {
  std::string element_id;
  std::uint64_t version = 0;
  double issued_ms = 0.0;    // client send time of the originating message
  double accepted_ms = 0.0;  // server applied it
  double converged_ms = 0.0; // every live replica shows it
  double convergence_ms = 0.0;  // converged_ms - accepted_ms
  double end_to_end_ms = 0.0;   // converged_ms - issued_ms
  bool converged = false;
};

struct MetricsReport {
  std::vector<CommandConvergence> commands;
  std::map<std::string, double> convergence_ms;  // worst case per element
  double max_divergence_ms = 0.0;
  std::map<std::string, std::uint64_t> message_counts;  // by msg_type
  std::uint64_t seat_denials = 0;
  std::string final_digest;
  std::map<std::string, std::string> replica_digests;  // live clients at end
  bool converged = true;
  double end_ms = 0.0;
  double scenario_end_ms = 0.0;  // last scripted action or hand sample
  double settled_ms = 0.0;       // last time any replica caught up with the server
  std::uint64_t ticks = 0;
  // Largest number of hand relays the server sent any one client about any
  // one owner within a one-second window (by send time).
  std::uint64_t max_hand_relays_per_second = 0;
};

std::string serialize_report(const MetricsReport& report);

struct SimulationOptions {
  std::ostream* event_log = nullptr;  // receives a replayable server log
};

MetricsReport run_scenario(const Scenario& s, const Room& room,
                           const SimulationOptions& options = {});
MetricsReport run_scenario(const Scenario& s, const SimulationOptions& options = {});

// ---- event log / replay -----------------------------------------------------

// First lines of every event log: the room and the gesture settings the
// server ran with.
void write_log_header(std::ostream& out, const Room& room, const GestureConfig& gesture);
// Optional last line: the state digest when recording stopped.
void write_log_trailer(std::ostream& out, const std::string& digest);

struct ReplayResult {
  std::string final_digest;
  std::size_t lines = 0;
  std::uint64_t ticks = 0;
};

// Re-applies OPEN/IN/CLOSE/TICK lines and checks every OUT/END/DIGEST line
// matches byte for byte. Throws Errc::replay_divergence with offset = 1-based line
// number of the first mismatch. `fallback_room` is used when the log has no
// ROOM header (e.g. an empty file); without one such a log throws
// Errc::empty_input.
ReplayResult replay_log(std::istream& log, const std::optional<Room>& fallback_room = {});
ReplayResult replay_log_file(const std::filesystem::path& path,
                             const std::optional<Room>& fallback_room = {});

// ---- authoring commands -----------------------------------------------------

struct CalibrateOutcome {
  Room room;
  CalibrationResult result;
  std::vector<std::string> untouched_viewpoints;  // not in any measurement
};

// Throws Errc::unknown_id when a measurement names a seat the manifest lacks.
CalibrateOutcome calibrate_room(const Room& room,
                                const std::vector<PoseGraphMeasurement>& measurements);

struct ValidateOutcome {
  std::vector<Violation> violations;
  int exit_code = 0;  // 0 iff no ERROR-level violations
};

// Throws Errc::io / Errc::syntax / Errc::schema if the file cannot be read
// as a manifest at all.
ValidateOutcome validate_manifest_file(const std::filesystem::path& path);
std::string format_violations(const std::vector<Violation>& violations);

}  // namespace vrmeet
