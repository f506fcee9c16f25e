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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrmeet/geometry.hpp"

namespace vrmeet {

// A seat: one equirectangular capture position.
struct Viewpoint {
  std::string id;
  std::string seat_label;
  std::string image_ref;  // relative to the manifest's directory
  Pose pose;              // room frame

  friend bool operator==(const Viewpoint&, const Viewpoint&) = default;
};

enum class ElementKind { projector_surface, tv, custom };

std::string_view to_string(ElementKind kind);
std::optional<ElementKind> element_kind_from_string(std::string_view s);

struct Extent {
  double width = 0.0;
  double height = 0.0;
  friend bool operator==(const Extent&, const Extent&) = default;
};

struct ElementState {
  std::uint64_t version = 0;
  std::uint64_t slide_index = 0;
  std::uint64_t slide_count = 1;
  std::string content_id;

  friend bool operator==(const ElementState&, const ElementState&) = default;
};

// A shared display surface. The orientation's -Z axis is the surface normal
// pointing into the room.
struct SharedElement {
  std::string id;
  ElementKind kind = ElementKind::custom;
  Pose pose;
  Extent extent;
  ElementState content_state;

  friend bool operator==(const SharedElement&, const SharedElement&) = default;
};

struct Room {
  std::string room_id;
  std::vector<Viewpoint> viewpoints;
  std::vector<SharedElement> elements;

  const Viewpoint& viewpoint(std::string_view id) const;
  const SharedElement& element(std::string_view id) const;
  const Viewpoint* find_viewpoint(std::string_view id) const;
  const SharedElement* find_element(std::string_view id) const;

  friend bool operator==(const Room&, const Room&) = default;
};

enum class Severity { warning, error };

struct Violation {
  Severity severity = Severity::error;
  std::string code;     // e.g. "duplicate_id", "non_positive_extent"
  std::string subject;  // id or field path
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

enum class ParseMode {
  // Throws on any ERROR-level violation.
  strict,
  // Only throws on syntax and schema-shape errors; invariants are left for
  // validate_room to report.
  lenient,
};

// Parses a `.room.json` manifest. Errors: Errc::syntax (offset = byte),
// Errc::schema (subject = field path), Errc::duplicate_id (subject = id).
Room parse_manifest(std::string_view text, ParseMode mode = ParseMode::strict);
Room load_manifest(const std::filesystem::path& path,
                   ParseMode mode = ParseMode::strict);
std::string serialize_manifest(const Room& room);

// Returns every violation at once. When `image_root` is given, referenced
// images that exist on disk get a 2:1 aspect check (WARNING); missing files
// are skipped.
std::vector<Violation> validate_room(
    const Room& room,
    const std::optional<std::filesystem::path>& image_root = std::nullopt);

bool has_errors(const std::vector<Violation>& violations);

Pose element_pose_in_viewpoint(const Room& room, std::string_view vp_id,
                               std::string_view el_id);
Pose viewpoint_pose_in_viewpoint(const Room& room,
                                 std::string_view observer_id,
                                 std::string_view other_id);

struct ImageSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

// Reads only the header of a PNG or JPEG file. nullopt if the file is
// missing or the format is not recognised.
std::optional<ImageSize> read_image_size(const std::filesystem::path& path);

}  // namespace vrmeet
