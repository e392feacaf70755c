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

// Binary checkpoint container.
//
//   "EGTCKPT1"                      8-byte magic
//   u32 n, n bytes                  ModelConfig as JSON
//   u32 count
//   count x { u32 len, name, u32 rank, rank x u64 dim, f32 data (row-major) }
//   u64 FNV-1a hash of every preceding byte
//
// All integers and floats are little-endian. Tensors are matched by name on
// load; unknown names are ignored so newer files stay readable.

#pragma once

#include <filesystem>
#include <string>

#include "egotarget/model.hpp"

namespace egotarget {

std::string serialize_checkpoint(const Model& model);
/// Throws CheckpointError on a bad magic, hash mismatch, truncation, shape
/// mismatch or missing tensor.
Model deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
/// Throws CheckpointError when the file is missing or corrupt.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace egotarget
