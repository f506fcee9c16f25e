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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vrmeet {

enum class Errc {
  invalid_direction,
  out_of_range,
  syntax,
  schema,
  duplicate_id,
  unknown_id,
  unknown_type,
  encoding,
  empty_input,
  disconnected_graph,
  invalid_input,
  io,
  scenario,
  replay_divergence,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for the whole library. `subject` carries the
// offending field name, id, or list of ids; `offset` is a byte offset for
// syntax errors or a 1-based line number for replay divergence.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string subject = {},
        std::size_t offset = 0)
      : std::runtime_error(std::move(message)),
        code_(code),
        subject_(std::move(subject)),
        offset_(offset) {}

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Errc code_;
  std::string subject_;
  std::size_t offset_;
};

}  // namespace vrmeet
