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

#include "vrmeet/room.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "vrmeet/errors.hpp"

namespace vrmeet {

using detail::json;

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::projector_surface: return "projector_surface";
    case ElementKind::tv: return "tv";
    case ElementKind::custom: return "custom";
  }
  return "custom";
}

std::optional<ElementKind> element_kind_from_string(std::string_view s) {
  if (s == "projector_surface") return ElementKind::projector_surface;
  if (s == "tv") return ElementKind::tv;
  if (s == "custom") return ElementKind::custom;
  return std::nullopt;
}

const Viewpoint* Room::find_viewpoint(std::string_view id) const {
  for (const auto& vp : viewpoints) {
    if (vp.id == id) return &vp;
  }
  return nullptr;
}

const SharedElement* Room::find_element(std::string_view id) const {
  for (const auto& el : elements) {
    if (el.id == id) return &el;
  }
  return nullptr;
}

const Viewpoint& Room::viewpoint(std::string_view id) const {
  if (const auto* vp = find_viewpoint(id)) return *vp;
  throw Error(Errc::unknown_id, "unknown viewpoint '" + std::string(id) + "'",
              std::string(id));
}

const SharedElement& Room::element(std::string_view id) const {
  if (const auto* el = find_element(id)) return *el;
  throw Error(Errc::unknown_id, "unknown element '" + std::string(id) + "'",
              std::string(id));
}

namespace {

Viewpoint parse_viewpoint(const json& j, const std::string& path) {
  using namespace detail;
  Viewpoint vp;
  vp.id = get_string(require(j, path, "id"), join_path(path, "id"));
  vp.seat_label =
      get_string(require(j, path, "seat_label"), join_path(path, "seat_label"));
  vp.image_ref = get_string(require(j, path, "image"), join_path(path, "image"));
  vp.pose = get_pose(require(j, path, "pose"), join_path(path, "pose"));
  return vp;
}

SharedElement parse_element(const json& j, const std::string& path) {
  using namespace detail;
  SharedElement el;
  el.id = get_string(require(j, path, "id"), join_path(path, "id"));
  const std::string kind_path = join_path(path, "kind");
  const auto kind =
      element_kind_from_string(get_string(require(j, path, "kind"), kind_path));
  if (!kind) schema_error(kind_path, "unknown element kind");
  el.kind = *kind;
  el.pose = get_pose(require(j, path, "pose"), join_path(path, "pose"));
  const std::string extent_path = join_path(path, "extent");
  const json& ext = require(j, path, "extent");
  if (!ext.is_array() || ext.size() != 2) {
    schema_error(extent_path, "expected [width,height]");
  }
  el.extent = {get_number(ext[0], index_path(extent_path, 0)),
               get_number(ext[1], index_path(extent_path, 1))};
  el.content_state.slide_count = get_uint(require(j, path, "slide_count"),
                                          join_path(path, "slide_count"));
  el.content_state.content_id =
      get_string(require(j, path, "content_id"), join_path(path, "content_id"));
  return el;
}

void check_unique(const std::vector<std::string>& ids, const std::string& list,
                  std::vector<Violation>& out) {
  std::set<std::string> seen;
  std::set<std::string> reported;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& id = ids[i];
    if (id.empty()) {
      out.push_back({Severity::error, "empty_id",
                     detail::index_path(list, i) + ".id",
                     list + " entry has an empty id"});
      continue;
    }
    if (!seen.insert(id).second && reported.insert(id).second) {
      out.push_back({Severity::error, "duplicate_id", id,
                     "duplicate " + list + " id '" + id + "'"});
    }
  }
}

bool pose_finite(const Pose& p) {
  const auto& q = p.orientation;
  return p.position.finite() && std::isfinite(q.w()) && std::isfinite(q.x()) &&
         std::isfinite(q.y()) && std::isfinite(q.z());
}

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint16_t be16(const unsigned char* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

}  // namespace

Room parse_manifest(std::string_view text, ParseMode mode) {
  using namespace detail;
  const json doc = parse_document(text);
  if (!doc.is_object()) schema_error("", "manifest must be a JSON object");

  Room room;
  room.room_id = get_string(require(doc, "", "room_id"), "room_id");
  const json& vps = get_array(require(doc, "", "viewpoints"), "viewpoints");
  for (std::size_t i = 0; i < vps.size(); ++i) {
    room.viewpoints.push_back(parse_viewpoint(vps[i], index_path("viewpoints", i)));
  }
  if (const auto it = doc.find("elements"); it != doc.end()) {
    const json& els = get_array(*it, "elements");
    for (std::size_t i = 0; i < els.size(); ++i) {
      room.elements.push_back(parse_element(els[i], index_path("elements", i)));
    }
  }

  if (mode == ParseMode::strict) {
    for (const auto& v : validate_room(room)) {
      if (v.severity != Severity::error) continue;
      if (v.code == "duplicate_id") {
        throw Error(Errc::duplicate_id, v.message, v.subject);
      }
      throw Error(Errc::schema, v.subject + ": " + v.message, v.subject);
    }
  }
  return room;
}

Room load_manifest(const std::filesystem::path& path, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot read manifest '" + path.string() + "'",
                path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), mode);
}

std::string serialize_manifest(const Room& room) {
  using namespace detail;
  json vps = json::array();
  for (const auto& vp : room.viewpoints) {
    vps.push_back({{"id", vp.id},
                   {"seat_label", vp.seat_label},
                   {"image", vp.image_ref},
                   {"pose", pose_to_json(vp.pose)}});
  }
  json els = json::array();
  for (const auto& el : room.elements) {
    els.push_back({{"id", el.id},
                   {"kind", to_string(el.kind)},
                   {"pose", pose_to_json(el.pose)},
                   {"extent", json::array({el.extent.width, el.extent.height})},
                   {"slide_count", el.content_state.slide_count},
                   {"content_id", el.content_state.content_id}});
  }
  const json doc{{"room_id", room.room_id}, {"viewpoints", vps}, {"elements", els}};
  return doc.dump(2) + "\n";
}

std::vector<Violation> validate_room(
    const Room& room, const std::optional<std::filesystem::path>& image_root) {
  std::vector<Violation> out;
  if (room.room_id.empty()) {
    out.push_back({Severity::error, "empty_room_id", "room_id", "room_id is empty"});
  }
  if (room.viewpoints.empty()) {
    out.push_back({Severity::error, "no_viewpoints", "viewpoints",
                   "room has no viewpoints"});
  }

  std::vector<std::string> ids;
  for (const auto& vp : room.viewpoints) ids.push_back(vp.id);
  check_unique(ids, "viewpoints", out);
  ids.clear();
  for (const auto& el : room.elements) ids.push_back(el.id);
  check_unique(ids, "elements", out);

  for (std::size_t i = 0; i < room.viewpoints.size(); ++i) {
    const auto& vp = room.viewpoints[i];
    const std::string path = detail::index_path("viewpoints", i);
    if (vp.image_ref.empty()) {
      out.push_back({Severity::error, "empty_image_ref", path + ".image",
                     "viewpoint '" + vp.id + "' has no image"});
    }
    if (!pose_finite(vp.pose)) {
      out.push_back({Severity::error, "invalid_pose", path + ".pose",
                     "viewpoint '" + vp.id + "' has a non-finite pose"});
    }
    if (image_root && !vp.image_ref.empty()) {
      if (const auto size = read_image_size(*image_root / vp.image_ref)) {
        if (std::uint64_t{size->width} != 2 * std::uint64_t{size->height}) {
          out.push_back({Severity::warning, "aspect_ratio", path + ".image",
                         "image '" + vp.image_ref + "' is " +
                             std::to_string(size->width) + "x" +
                             std::to_string(size->height) +
                             ", expected 2:1 equirectangular"});
        }
      }
    }
  }

  for (std::size_t i = 0; i < room.elements.size(); ++i) {
    const auto& el = room.elements[i];
    const std::string path = detail::index_path("elements", i);
    if (!(el.extent.width > 0.0) || !(el.extent.height > 0.0) ||
        !std::isfinite(el.extent.width) || !std::isfinite(el.extent.height)) {
      out.push_back({Severity::error, "non_positive_extent", path + ".extent",
                     "non-positive extent"});
    }
    if (!pose_finite(el.pose)) {
      out.push_back({Severity::error, "invalid_pose", path + ".pose",
                     "element '" + el.id + "' has a non-finite pose"});
    }
    const auto& st = el.content_state;
    if (st.slide_count == 0) {
      out.push_back({Severity::error, "invalid_slide_count", path + ".slide_count",
                     "slide_count must be positive"});
    } else if (st.slide_index >= st.slide_count) {
      out.push_back({Severity::error, "slide_index_out_of_range",
                     path + ".slide_index", "slide_index >= slide_count"});
    }
  }
  return out;
}

bool has_errors(const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    if (v.severity == Severity::error) return true;
  }
  return false;
}

Pose element_pose_in_viewpoint(const Room& room, std::string_view vp_id,
                               std::string_view el_id) {
  const auto& vp = room.viewpoint(vp_id);
  const auto& el = room.element(el_id);
  return to_viewpoint_frame(vp.pose, el.pose);
}

Pose viewpoint_pose_in_viewpoint(const Room& room, std::string_view observer_id,
                                 std::string_view other_id) {
  const auto& observer = room.viewpoint(observer_id);
  const auto& other = room.viewpoint(other_id);
  if (observer_id == other_id) return Pose::identity();
  return to_viewpoint_frame(observer.pose, other.pose);
}

std::optional<ImageSize> read_image_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  std::array<unsigned char, 24> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = static_cast<std::size_t>(in.gcount());

  static constexpr std::array<unsigned char, 8> kPngSig{0x89, 'P', 'N', 'G',
                                                        '\r', '\n', 0x1A, '\n'};
  if (got >= 24 && std::equal(kPngSig.begin(), kPngSig.end(), head.begin()) &&
      head[12] == 'I' && head[13] == 'H' && head[14] == 'D' && head[15] == 'R') {
    return ImageSize{be32(&head[16]), be32(&head[20])};
  }

  if (got >= 2 && head[0] == 0xFF && head[1] == 0xD8) {
    in.clear();
    in.seekg(2);
    unsigned char marker[4];
    while (in.read(reinterpret_cast<char*>(marker), 2)) {
      if (marker[0] != 0xFF) return std::nullopt;
      const unsigned char type = marker[1];
      if (type == 0xFF) {  // fill byte
        in.seekg(-1, std::ios::cur);
        continue;
      }
      if (type == 0xD8 || (type >= 0xD0 && type <= 0xD7) || type == 0x01) {
        continue;
      }
      if (!in.read(reinterpret_cast<char*>(marker + 2), 2)) return std::nullopt;
      const std::uint16_t len = be16(marker + 2);
      if (len < 2) return std::nullopt;
      const bool sof = type >= 0xC0 && type <= 0xCF && type != 0xC4 &&
                       type != 0xC8 && type != 0xCC;
      if (sof) {
        unsigned char sof_body[5];
        if (!in.read(reinterpret_cast<char*>(sof_body), 5)) return std::nullopt;
        return ImageSize{be16(sof_body + 3), be16(sof_body + 1)};
      }
      in.seekg(len - 2, std::ios::cur);
    }
  }
  return std::nullopt;
}

}  // namespace vrmeet
