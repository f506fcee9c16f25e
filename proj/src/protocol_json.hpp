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

// Wire-format JSON pieces reused outside the envelope codec.

#include <string>

#include <nlohmann/json.hpp>

#include "vrmeet/protocol.hpp"

namespace vrmeet::detail {

nlohmann::json hand_frame_to_json(const HandFrame& f);
HandFrame hand_frame_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json state_to_json(const ElementState& s);
nlohmann::json slide_command_to_json(const SlideCommand& c);
SlideCommand slide_command_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace vrmeet::detail
