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
#include <string>

struct ServeConfig {
  std::string manifest;
  std::uint16_t port = 7870;
  double tick_hz = 20.0;
  std::string log;  // empty: no event log
};

// Blocks until SIGINT/SIGTERM. Returns a process exit code.
int run_serve(const ServeConfig& cfg);
