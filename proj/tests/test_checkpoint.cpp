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

#include <fstream>

#include <gtest/gtest.h>

#include "egotarget/checkpoint.hpp"
#include "egotarget/config_json.hpp"
#include "egotarget/error.hpp"
#include "egotarget/training.hpp"
#include "test_util.hpp"

namespace egotarget {
namespace {

using testing::random_clip;

TEST(CheckpointTest, RoundTripIsExact) {
  for (const ModelConfig& cfg : {testing::toy_conv_config(), testing::toy_feature_config()}) {
    const Model m = Model::initialize(cfg, 77);
    const std::string bytes = serialize_checkpoint(m);
    const Model back = deserialize_checkpoint(bytes);
    EXPECT_EQ(serialize_checkpoint(back), bytes);
    EXPECT_EQ(to_json(back.config()), to_json(cfg));
    const Clip clip = random_clip(cfg.input_shape, 6, 3, 2);
    const auto a = forward_clip(m, clip);
    const auto b = forward_clip(back, clip);
    for (int t = 0; t < 6; ++t) EXPECT_EQ(a[t].raw_point, b[t].raw_point);
  }
}

TEST(CheckpointTest, FileRoundTrip) {
  const auto dir = testing::temp_dir("ckpt_file");
  const Model m = Model::initialize(testing::toy_conv_config(), 5);
  save_checkpoint(m, dir / "m.bin");
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(dir / "m.bin")), serialize_checkpoint(m));
  EXPECT_THROW(load_checkpoint(dir / "absent.bin"), CheckpointError);
}

TEST(CheckpointTest, CorruptionIsDetected) {
  const std::string bytes = serialize_checkpoint(Model::initialize(testing::toy_conv_config(), 5));
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(deserialize_checkpoint(flipped), CheckpointError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 9)), CheckpointError);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(magic), CheckpointError);
  EXPECT_THROW(deserialize_checkpoint(""), CheckpointError);
}

TEST(ConfigJsonTest, DefaultsRoundTrip) {
  const TrainConfig train;
  EXPECT_EQ(to_json(train_config_from_json(to_json(train))), to_json(train));
  const GenerateConfig gen;
  EXPECT_EQ(to_json(generate_config_from_json(to_json(gen))), to_json(gen));
}

TEST(ConfigJsonTest, NonDefaultValuesSurvive) {
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.seeds = {4, 9};
  cfg.loss.delta = 0.25;
  cfg.model = testing::toy_feature_config(32);
  cfg.model.grid.gamma = 0.01;
  const TrainConfig back = train_config_from_json(to_json(cfg));
  EXPECT_EQ(back.learning_rate, 3e-3);
  EXPECT_EQ(back.seeds, cfg.seeds);
  EXPECT_EQ(back.loss.delta, 0.25);
  EXPECT_EQ(back.model.grid.bins, 32);
  EXPECT_EQ(back.model.encoder, VisualEncoderKind::kFeatures);
  EXPECT_EQ(to_json(back), to_json(cfg));

  GenerateConfig gen;
  gen.world.marker_radius = 0.07;
  gen.world.intrinsics.fx = 1234.5;
  gen.num_clips = 12;
  EXPECT_EQ(to_json(generate_config_from_json(to_json(gen))), to_json(gen));
}

ConfigError config_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError";
  return ConfigError("", "");
}

TEST(ConfigJsonTest, ErrorsNameTheField) {
  using nlohmann::json;
  EXPECT_EQ(config_error([] { train_config_from_json(json{{"batch_size", 0}}); }).field(),
            "batch_size");
  EXPECT_EQ(config_error([] { train_config_from_json(json{{"lerning_rate", 1e-3}}); }).field(),
            "lerning_rate");
  EXPECT_EQ(config_error([] {
              train_config_from_json(json{{"model", {{"grid", {{"bins", "many"}}}}}});
            }).field(),
            "model.grid.bins");
  EXPECT_EQ(config_error([] {
              generate_config_from_json(json{{"world", {{"marker_radius", -1.0}}}});
            }).field(),
            "world.marker_radius");
  EXPECT_EQ(config_error([] { generate_config_from_json(json::array()); }).field(), "<root>");
}

TEST(ConfigJsonTest, UnreadableFileIsConfigError) {
  const auto dir = testing::temp_dir("cfg_file");
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(read_json_file(dir / "bad.json"), ConfigError);
  EXPECT_THROW(read_json_file(dir / "missing.json"), ConfigError);
}

}  // namespace
}  // namespace egotarget
