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

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "serve.hpp"
#include "vrmeet/vrmeet.h"

namespace {

int report_failure(const char* command, vrm_status s) {
  std::cerr << "vrmeet " << command << ": " << vrm_status_name(s) << ": " << vrm_last_error()
            << '\n';
  return s == VRM_ERR_REPLAY_DIVERGENCE ? 1 : 2;
}

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  vrm_string_free(s);
  return out;
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return static_cast<bool>(out);
}

int cmd_simulate(const std::string& scenario, const std::string& log, const std::string& out) {
  char* report = nullptr;
  const vrm_status s =
      vrm_simulate(scenario.c_str(), log.empty() ? nullptr : log.c_str(), &report);
  if (s != VRM_OK) return report_failure("simulate", s);
  const std::string text = take(report);
  if (out.empty()) {
    std::cout << text;
  } else if (!write_text(out, text)) {
    std::cerr << "vrmeet simulate: cannot write '" << out << "'\n";
    return 2;
  }
  return 0;
}

int cmd_calibrate(const std::string& measurements, const std::string& manifest,
                  const std::string& out) {
  char* updated = nullptr;
  double rms = 0.0;
  const vrm_status s =
      vrm_calibrate(measurements.c_str(), manifest.c_str(), &updated, &rms);
  if (s != VRM_OK) return report_failure("calibrate", s);
  const std::string text = take(updated);
  if (out.empty()) {
    std::cout << text;
    std::cerr << "residual_rms: " << rms << '\n';
  } else {
    if (!write_text(out, text)) {
      std::cerr << "vrmeet calibrate: cannot write '" << out << "'\n";
      return 2;
    }
    std::cout << "residual_rms: " << rms << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& manifest) {
  int exit_code = 0;
  char* listing = nullptr;
  const vrm_status s = vrm_validate(manifest.c_str(), &exit_code, &listing);
  if (s != VRM_OK) return report_failure("validate", s);
  const std::string text = take(listing);
  std::cout << text;
  if (exit_code == 0) std::cout << "ok\n";
  return exit_code;
}

int cmd_replay(const std::string& log, const std::string& manifest) {
  char* digest = nullptr;
  uint64_t lines = 0;
  const vrm_status s =
      vrm_replay(log.c_str(), manifest.empty() ? nullptr : manifest.c_str(), &digest, &lines);
  if (s != VRM_OK) return report_failure("replay", s);
  std::cout << "replay ok: " << lines << " lines, final digest " << take(digest) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vrmeet: multi-user VR meeting room session engine"};
  app.set_version_flag("--version", vrm_version());
  app.require_subcommand(1);

  ServeConfig serve;
  serve.port = vrm_default_port();
  auto* serve_cmd = app.add_subcommand("serve", "run the session server");
  serve_cmd->add_option("--manifest", serve.manifest, "room manifest")
      ->required()
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "listen port (0 picks a free one)")
      ->capture_default_str();
  serve_cmd->add_option("--tick-hz", serve.tick_hz, "relay tick rate")->capture_default_str();
  serve_cmd->add_option("--log", serve.log, "write a replayable event log");

  std::string scenario, sim_log, sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "run a scripted scenario");
  sim_cmd->add_option("scenario", scenario, "scenario JSON")->required();
  sim_cmd->add_option("--log", sim_log, "write the server event log");
  sim_cmd->add_option("--out", sim_out, "write the report here instead of stdout");

  std::string measurements, cal_manifest, cal_out;
  auto* cal_cmd = app.add_subcommand("calibrate", "register seat poses from measurements");
  cal_cmd->add_option("measurements", measurements, "measurement JSON")->required();
  cal_cmd->add_option("manifest", cal_manifest, "room manifest")->required();
  cal_cmd->add_option("--out", cal_out, "write the updated manifest here");

  std::string val_manifest;
  auto* val_cmd = app.add_subcommand("validate", "check a room manifest");
  val_cmd->add_option("manifest", val_manifest, "room manifest")->required();

  std::string replay_log, replay_manifest;
  auto* replay_cmd = app.add_subcommand("replay", "re-run an event log and verify it");
  replay_cmd->add_option("log", replay_log, "event log")->required();
  replay_cmd->add_option("--manifest", replay_manifest,
                         "room for logs without a room header");

  CLI11_PARSE(app, argc, argv);

  if (*serve_cmd) return run_serve(serve);
  if (*sim_cmd) return cmd_simulate(scenario, sim_log, sim_out);
  if (*cal_cmd) return cmd_calibrate(measurements, cal_manifest, cal_out);
  if (*val_cmd) return cmd_validate(val_manifest);
  if (*replay_cmd) return cmd_replay(replay_log, replay_manifest);
  return 2;
}
