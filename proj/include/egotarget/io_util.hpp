// Copyright 2026 The egotarget Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text/JSON helpers shared by the file formats.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "egotarget/geometry.hpp"

namespace egotarget {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Throws FormatError(field) on anything but a complete number.
double parse_double(std::string_view text, const std::string& field);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path,
                           const std::string& field);

nlohmann::json intrinsics_to_json(const CameraIntrinsics& k);
/// Throws FormatError(field) on missing or invalid entries.
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j,
                                      const std::string& field);

/// Row-major 3x3 rotation followed by the translation (12 numbers).
nlohmann::json transform_to_json(const RigidTransform& tf);
RigidTransform transform_from_json(const nlohmann::json& j,
                                   const std::string& field);

}  // namespace egotarget
