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

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "egotarget/data.hpp"
#include "egotarget/error.hpp"
#include "egotarget/io_util.hpp"

namespace egotarget {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "visual.npy payloads are written as native little-endian floats");

namespace {

std::string read_file(const fs::path& path, const std::string& field) {
  return read_text_file(path, field);
}

void write_npy(const fs::path& path, const std::vector<int>& shape,
               const std::vector<float>& data) {
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    dict += (shape.size() == 1 || i + 1 < shape.size()) ? ", " : "";
  }
  dict += "), }";
  // Header (magic + version + length + dict) is padded to 64 bytes.
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';
  std::ofstream out(path, std::ios::binary);
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(dict.size());
  const char len_bytes[2] = {static_cast<char>(len & 0xff),
                             static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<float> read_npy(const fs::path& path, std::vector<int>& shape) {
  const std::string field = "visual";
  const std::string bytes = read_file(path, field);
  if (bytes.size() < 10 || bytes.compare(0, 6, "\x93NUMPY") != 0) {
    throw FormatError(field, "missing npy magic");
  }
  if (bytes[6] != 1) throw FormatError(field, "unsupported npy version");
  const std::size_t hlen = static_cast<unsigned char>(bytes[8]) |
                           (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < 10 + hlen) throw FormatError(field, "truncated header");
  const std::string header = bytes.substr(10, hlen);
  if (header.find("'descr': '<f4'") == std::string::npos) {
    throw FormatError(field, "dtype must be <f4");
  }
  if (header.find("'fortran_order': False") == std::string::npos) {
    throw FormatError(field, "fortran order not supported");
  }
  const auto open = header.find('(');
  const auto close = header.find(')', open);
  if (open == std::string::npos || close == std::string::npos) {
    throw FormatError(field, "missing shape");
  }
  shape.clear();
  std::size_t count = 1;
  std::stringstream dims(header.substr(open + 1, close - open - 1));
  std::string tok;
  while (std::getline(dims, tok, ',')) {
    tok.erase(std::remove(tok.begin(), tok.end(), ' '), tok.end());
    if (tok.empty()) continue;
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || v < 0) throw FormatError(field, "bad shape entry");
    shape.push_back(v);
    count *= static_cast<std::size_t>(v);
  }
  const std::size_t payload = bytes.size() - 10 - hlen;
  if (payload != count * sizeof(float)) {
    throw FormatError(field, "payload size does not match shape (truncated?)");
  }
  std::vector<float> data(count);
  std::memcpy(data.data(), bytes.data() + 10 + hlen, payload);
  return data;
}

std::vector<std::vector<double>> read_csv(const fs::path& path,
                                          const std::string& field) {
  std::istringstream in(read_file(path, field));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      row.push_back(parse_double(cell, field));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void save_clip(const Clip& clip, const fs::path& dir) {
  fs::create_directories(dir);
  const int t_len = clip.length();
  json meta = {{"id", clip.id},
               {"T", t_len},
               {"split", std::string(to_string(clip.split))},
               {"scene_id", clip.scene_id},
               {"intrinsics", intrinsics_to_json(clip.intrinsics)},
               {"visual_shape",
                {clip.visual_shape.height, clip.visual_shape.width,
                 clip.visual_shape.channels}}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");

  std::string lm;
  std::string tg;
  for (const auto& f : clip.frames) {
    lm += f.landmarks.present ? "1" : "0";
    for (const auto& p : f.landmarks.points) {
      lm += "," + format_double(p.x()) + "," + format_double(p.y());
    }
    lm += "\n";
    tg += format_double(f.target_gt.x()) + "," + format_double(f.target_gt.y()) +
          "," + format_double(f.target_gt.z()) + "\n";
  }
  write_text_file(dir / "landmarks.csv", lm);
  write_text_file(dir / "targets.csv", tg);

  std::vector<float> visual;
  visual.reserve(static_cast<std::size_t>(t_len) * clip.visual_shape.size());
  for (const auto& f : clip.frames) {
    visual.insert(visual.end(), f.visual.data(), f.visual.data() + f.visual.size());
  }
  write_npy(dir / "visual.npy", {t_len, clip.visual_shape.height,
                                 clip.visual_shape.width, clip.visual_shape.channels},
            visual);
}

Clip load_clip(const fs::path& dir) {
  Clip clip;
  json meta;
  try {
    meta = json::parse(read_file(dir / "meta.json", "meta.json"));
  } catch (const json::parse_error& e) {
    throw FormatError("meta.json", e.what());
  }
  int t_len = 0;
  try {
    clip.id = meta.at("id").get<std::string>();
    t_len = meta.at("T").get<int>();
    clip.split = parse_split(meta.at("split").get<std::string>());
    clip.scene_id = meta.at("scene_id").get<int>();
    const auto shape = meta.at("visual_shape").get<std::vector<int>>();
    if (shape.size() != 3) throw FormatError("meta.json:visual_shape", "need 3 dims");
    clip.visual_shape = {shape[0], shape[1], shape[2]};
  } catch (const json::exception& e) {
    throw FormatError("meta.json", e.what());
  } catch (const DomainError& e) {
    throw FormatError("meta.json:split", e.what());
  }
  if (!meta.contains("intrinsics")) {
    throw FormatError("meta.json:intrinsics", "missing");
  }
  clip.intrinsics = intrinsics_from_json(meta["intrinsics"], "meta.json:intrinsics");
  if (t_len < 2) throw FormatError("meta.json:T", "need T >= 2");

  const auto lm_rows = read_csv(dir / "landmarks.csv", "landmarks");
  if (static_cast<int>(lm_rows.size()) != t_len) {
    throw FormatError("landmarks", "expected " + std::to_string(t_len) +
                                       " rows, got " + std::to_string(lm_rows.size()));
  }
  const auto tg_rows = read_csv(dir / "targets.csv", "targets");
  if (static_cast<int>(tg_rows.size()) != t_len) {
    throw FormatError("targets", "expected " + std::to_string(t_len) + " rows");
  }
  std::vector<int> shape;
  const std::vector<float> visual = read_npy(dir / "visual.npy", shape);
  if (shape != std::vector<int>{t_len, clip.visual_shape.height,
                                clip.visual_shape.width, clip.visual_shape.channels}) {
    throw FormatError("visual", "shape does not match meta.json");
  }

  clip.frames.resize(static_cast<std::size_t>(t_len));
  const int stride = clip.visual_shape.size();
  for (int t = 0; t < t_len; ++t) {
    Frame& f = clip.frames[t];
    const auto& row = lm_rows[t];
    if (row.size() != 1 + 2 * kNumLandmarks) {
      throw FormatError("landmarks", "row " + std::to_string(t) + " has " +
                                         std::to_string((row.size() - 1) / 2) +
                                         " landmarks, expected 21");
    }
    if (row[0] != 0.0 && row[0] != 1.0) {
      throw FormatError("landmarks", "present flag must be 0 or 1");
    }
    f.landmarks.present = row[0] == 1.0;
    for (int i = 0; i < kNumLandmarks; ++i) {
      f.landmarks.points[i] = Eigen::Vector2d(row[1 + 2 * i], row[2 + 2 * i]);
    }
    try {
      f.landmarks.validate();
    } catch (const DomainError& e) {
      throw FormatError("landmarks", e.what());
    }
    if (tg_rows[t].size() != 3) {
      throw FormatError("targets", "row " + std::to_string(t) + " needs 3 columns");
    }
    f.target_gt = Eigen::Vector3d(tg_rows[t][0], tg_rows[t][1], tg_rows[t][2]);
    f.visual = Eigen::Map<const Eigen::VectorXf>(visual.data() + t * stride, stride);
  }
  try {
    clip.validate();
  } catch (const DomainError& e) {
    throw FormatError("clip", e.what());
  }
  return clip;
}

void save_dataset(const std::vector<Clip>& clips, const fs::path& root) {
  fs::create_directories(root);
  for (const auto& c : clips) save_clip(c, root / c.id);
}

std::vector<Clip> load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw FormatError("dataset", root.string() + " is not a directory");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<Clip> clips;
  clips.reserve(dirs.size());
  for (const auto& d : dirs) clips.push_back(load_clip(d));
  return clips;
}

}  // namespace egotarget
