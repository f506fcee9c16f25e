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

#include "vrmeet/errors.hpp"

namespace vrmeet {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_direction: return "invalid_direction";
    case Errc::out_of_range: return "out_of_range";
    case Errc::syntax: return "syntax";
    case Errc::schema: return "schema";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::unknown_id: return "unknown_id";
    case Errc::unknown_type: return "unknown_type";
    case Errc::encoding: return "encoding";
    case Errc::empty_input: return "empty_input";
    case Errc::disconnected_graph: return "disconnected_graph";
    case Errc::invalid_input: return "invalid_input";
    case Errc::io: return "io";
    case Errc::scenario: return "scenario";
    case Errc::replay_divergence: return "replay_divergence";
  }
  return "unknown";
}

}  // namespace vrmeet
