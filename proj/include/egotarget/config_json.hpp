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

// JSON forms of the configuration structs. Every key is optional and falls
// back to the struct default; unknown keys and ill-typed or invalid values
// raise ConfigError with the dotted path of the entry (e.g. "model.grid.bins").

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "egotarget/data.hpp"
#include "egotarget/losses.hpp"
#include "egotarget/model.hpp"
#include "egotarget/training.hpp"

namespace egotarget {

nlohmann::json to_json(const GridSpec& grid);
nlohmann::json to_json(const WorkspaceBox& box);
nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const LossConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const SyntheticWorldConfig& cfg);
nlohmann::json to_json(const GenerateConfig& cfg);

ModelConfig model_config_from_json(const nlohmann::json& j,
                                   const std::string& path = "model");
LossConfig loss_config_from_json(const nlohmann::json& j,
                                 const std::string& path = "loss");
TrainConfig train_config_from_json(const nlohmann::json& j,
                                   const std::string& path = "");
SyntheticWorldConfig world_config_from_json(const nlohmann::json& j,
                                            const std::string& path = "world");
GenerateConfig generate_config_from_json(const nlohmann::json& j,
                                         const std::string& path = "");

/// Parses a JSON file; a syntax error is a ConfigError on field "<file>".
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace egotarget
