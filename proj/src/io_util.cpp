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

#include "egotarget/io_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "egotarget/error.hpp"

namespace egotarget {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(std::string_view text, const std::string& field) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' ||
                           text.back() == '\t')) {
    text.remove_suffix(1);
  }
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty()) {
    throw FormatError(field, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path,
                           const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(field, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json intrinsics_to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
          {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j, const std::string& field) {
  CameraIntrinsics k;
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(field, e.what());
  }
  try {
    k.validate();
  } catch (const DomainError& e) {
    throw FormatError(field, e.what());
  }
  return k;
}

json transform_to_json(const RigidTransform& tf) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(tf.rotation(r, c));
  }
  return {{"rotation", rot},
          {"translation",
           {tf.translation.x(), tf.translation.y(), tf.translation.z()}}};
}

RigidTransform transform_from_json(const json& j, const std::string& field) {
  RigidTransform tf;
  try {
    const auto rot = j.at("rotation").get<std::vector<double>>();
    const auto trans = j.at("translation").get<std::vector<double>>();
    if (rot.size() != 9 || trans.size() != 3) {
      throw FormatError(field, "rotation needs 9 values, translation 3");
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) tf.rotation(r, c) = rot[3 * r + c];
    }
    tf.translation = Eigen::Vector3d(trans[0], trans[1], trans[2]);
  } catch (const json::exception& e) {
    throw FormatError(field, e.what());
  }
  if (!tf.is_valid()) throw FormatError(field, "not a rigid transform");
  return tf;
}

}  // namespace egotarget
