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

// Shared fixtures for the unit tests and the acceptance runner.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "egotarget/data.hpp"
#include "egotarget/model.hpp"

namespace egotarget::testing {

/// Small conv model over 8x8 images with dims <= 16.
inline ModelConfig toy_conv_config(int bins = 8) {
  ModelConfig cfg;
  cfg.input_shape = {8, 8, 3};
  cfg.conv_channels = {3, 4, 4, 4};
  cfg.visual_dim = 8;
  cfg.hand_hidden = 8;
  cfg.hand_dim = 6;
  cfg.fused_dim = 8;
  cfg.lstm_hidden = 6;
  cfg.head_hidden = 8;
  cfg.aux_hidden = 5;
  cfg.grid.bins = bins;
  return cfg;
}

/// Feature-vector model (1 x 1 x 10 inputs).
inline ModelConfig toy_feature_config(int bins = 16) {
  ModelConfig cfg = toy_conv_config(bins);
  cfg.encoder = VisualEncoderKind::kFeatures;
  cfg.input_shape = {1, 1, 10};
  return cfg;
}

/// Random clip matching `shape`. The first `absent` frames have no hand.
inline Clip random_clip(const VisualShape& shape, int length, std::uint64_t seed,
                        int absent = 1, Split split = Split::kTrain) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Clip clip;
  clip.id = "rand_" + std::to_string(seed);
  clip.split = split;
  clip.visual_shape = shape;
  const CameraIntrinsics& k = clip.intrinsics;
  Eigen::Vector2d tip(k.width * (0.2 + 0.6 * u(rng)), k.height * (0.2 + 0.6 * u(rng)));
  for (int t = 0; t < length; ++t) {
    Frame f;
    f.visual.resize(shape.size());
    for (int i = 0; i < shape.size(); ++i) f.visual[i] = static_cast<float>(u(rng));
    if (t >= absent) {
      f.landmarks.present = true;
      tip += Eigen::Vector2d(80.0 * (u(rng) - 0.5), 80.0 * (u(rng) - 0.5));
      for (int i = 0; i < kNumLandmarks; ++i) {
        f.landmarks.points[i] =
            tip + Eigen::Vector2d(60.0 * (u(rng) - 0.5), 60.0 * (u(rng) - 0.5));
      }
      f.landmarks.points[kIndexFingertip] = tip;
    }
    f.target_gt = Eigen::Vector3d(0.6 * (u(rng) - 0.5), 0.4 * (u(rng) - 0.5),
                                  0.4 + 0.6 * u(rng));
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("egotarget_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Small synthetic world rendering `side` x `side` images.
inline SyntheticWorldConfig small_world(int side = 16, std::uint64_t seed = 0) {
  SyntheticWorldConfig cfg;
  cfg.visual_shape = {side, side, 3};
  cfg.seed = seed;
  return cfg;
}

}  // namespace egotarget::testing
