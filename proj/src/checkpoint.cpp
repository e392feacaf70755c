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

#include "egotarget/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "egotarget/config_json.hpp"
#include "egotarget/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace egotarget {

namespace {

constexpr char kMagic[8] = {'E', 'G', 'T', 'C', 'K', 'P', 'T', '1'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Cursor {
 public:
  Cursor(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > end_ - pos_) throw CheckpointError("checkpoint is truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

template <typename Tensor>
void put_tensor(std::string& out, const std::string& name, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  const bool matrix = Tensor::ColsAtCompileTime != 1;
  put<std::uint32_t>(out, matrix ? 2u : 1u);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows()));
  if (matrix) put<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols()));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      put<float>(out, static_cast<float>(t(r, c)));
    }
  }
}

struct StoredTensor {
  std::vector<std::uint64_t> dims;
  const char* data = nullptr;
};

}  // namespace

std::string serialize_checkpoint(const Model& model) {
  std::string out(kMagic, sizeof(kMagic));
  const std::string cfg = to_json(model.config()).dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  std::uint32_t count = 0;
  model.params().for_each([&count](const std::string&, const auto&) { ++count; });
  put<std::uint32_t>(out, count);
  model.params().for_each(
      [&out](const std::string& name, const auto& t) { put_tensor(out, name, t); });
  put<std::uint64_t>(out, fnv1a(out.data(), out.size()));
  return out;
}

Model deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored_hash;
  std::memcpy(&stored_hash, bytes.data() + body, 8);
  if (stored_hash != fnv1a(bytes.data(), body)) {
    throw CheckpointError("checkpoint hash mismatch (corrupt file)");
  }

  Cursor cur(bytes, body);
  cur.take(sizeof(kMagic));
  const auto cfg_len = cur.get<std::uint32_t>();
  const std::string cfg_text(cur.take(cfg_len), cfg_len);
  ModelConfig cfg;
  try {
    cfg = model_config_from_json(nlohmann::json::parse(cfg_text), "model");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad model config: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("bad model config: ") + e.what());
  }

  std::map<std::string, StoredTensor> stored;
  const auto count = cur.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = cur.get<std::uint32_t>();
    std::string name(cur.take(name_len), name_len);
    StoredTensor t;
    const auto rank = cur.get<std::uint32_t>();
    if (rank < 1 || rank > 2) throw CheckpointError(name + ": unsupported rank");
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.dims.push_back(cur.get<std::uint64_t>());
      n *= t.dims.back();
    }
    if (n > bytes.size()) throw CheckpointError(name + ": implausible size");
    t.data = cur.take(n * sizeof(float));
    stored[name] = std::move(t);
  }
  if (!cur.done()) throw CheckpointError("trailing bytes before the hash");

  Model model(cfg);
  model.params().for_each([&stored](const std::string& name, auto& tensor) {
    auto it = stored.find(name);
    if (it == stored.end()) throw CheckpointError("missing tensor " + name);
    const StoredTensor& t = it->second;
    const bool matrix = std::decay_t<decltype(tensor)>::ColsAtCompileTime != 1;
    const std::uint64_t rows = t.dims[0];
    const std::uint64_t cols = t.dims.size() == 2 ? t.dims[1] : 1;
    if ((t.dims.size() == 2) != matrix ||
        rows != static_cast<std::uint64_t>(tensor.rows()) ||
        cols != static_cast<std::uint64_t>(tensor.cols())) {
      throw CheckpointError("shape mismatch for tensor " + name);
    }
    const char* p = t.data;
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
        float v;
        std::memcpy(&v, p, sizeof(float));
        p += sizeof(float);
        tensor(r, c) = static_cast<double>(v);
      }
    }
  });
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace egotarget
