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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "egotarget/geometry.hpp"

namespace egotarget {

inline constexpr int kNumLandmarks = 21;
// Index fingertip in the usual 21-point hand topology.
inline constexpr int kIndexFingertip = 8;
// Training clips are truncated to at most this many frames.
inline constexpr int kTrainClipCap = 25;

enum class Split { kTrain, kVal, kTestSeen, kTestUnseen };

std::string_view to_string(Split split);
// Throws DomainError on an unknown name.
Split parse_split(std::string_view name);

/// 21 landmark pixels. When no hand is detected every point is (0, 0).
struct HandLandmarks {
  std::array<Eigen::Vector2d, kNumLandmarks> points;
  bool present = false;

  HandLandmarks() { points.fill(Eigen::Vector2d::Zero()); }
  static HandLandmarks absent() { return {}; }

  const Eigen::Vector2d& fingertip(int index = kIndexFingertip) const {
    return points.at(static_cast<std::size_t>(index));
  }
  /// The 42-value stacked form (x0, y0, x1, y1, ...).
  Eigen::VectorXd stacked() const;
  /// Throws DomainError when an absent hand carries non-zero points.
  void validate() const;
};

/// Per-frame visual tensor shape (height x width x channels). A precomputed
/// feature vector of dimension D is stored as 1 x 1 x D.
struct VisualShape {
  int height = 64;
  int width = 64;
  int channels = 3;

  int size() const { return height * width * channels; }
  bool operator==(const VisualShape&) const = default;
};

struct Frame {
  Eigen::VectorXf visual;  // HWC, row-major pixels
  HandLandmarks landmarks;
  // Final-frame action target expressed in this frame's camera coordinates.
  Eigen::Vector3d target_gt = Eigen::Vector3d::Zero();
};

struct Clip {
  std::string id;
  int scene_id = 0;
  Split split = Split::kTrain;
  CameraIntrinsics intrinsics;
  VisualShape visual_shape;
  std::vector<Frame> frames;

  int length() const { return static_cast<int>(frames.size()); }
  /// Checks T >= 2, the training cap, landmark and target invariants, and
  /// visual sizes. Throws DomainError.
  void validate() const;
};

/// Parameters of the synthetic reach-motion world used in place of recorded
/// egocentric video.
struct SyntheticWorldConfig {
  int scene_id = 0;
  CameraIntrinsics intrinsics;
  VisualShape visual_shape;
  WorkspaceBox workspace;

  // Action targets are sampled in the last frame's camera coordinates.
  Eigen::Vector3d target_min{-0.35, -0.05, 0.40};
  Eigen::Vector3d target_max{0.35, 0.30, 0.80};
  // The hand starts close to the camera, low in the view.
  Eigen::Vector3d hand_start_min{-0.20, 0.15, 0.25};
  Eigen::Vector3d hand_start_max{0.20, 0.30, 0.40};

  double peak_speed = 0.08;      // m/frame upper bound on fingertip speed
  double ease_shape = 2.5;       // >1; larger concentrates motion mid-clip
  double arc_amplitude = 0.05;   // m, sideways bulge of the reach path
  double ego_rotation = 0.002;   // rad/frame (std of per-frame increment)
  double ego_translation = 0.002;  // m/frame
  double landmark_jitter = 2.0;  // px (std), fingertip is not jittered
  double hand_scale = 1.0;       // multiplier on a ~10 cm hand template
  double absent_fraction = 0.2;  // max fraction of leading hand-less frames
  int num_distractors = 2;       // extra markers that are not the target
  // Rendered disk radii in meters.
  double marker_radius = 0.025;
  double hand_blob_radius = 0.045;

  int clip_length_min = 10;
  int clip_length_max = 115;
  double clip_length_mean = 24.0;

  int fingertip_index = kIndexFingertip;
  int max_retries = 200;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct GeneratedClip {
  Clip clip;
  // Camera-to-world pose for every frame; world is the first camera frame.
  std::vector<RigidTransform> camera_poses;
};

/// Synthesizes one reach motion. Deterministic in (cfg, rng_seed). Throws
/// GenerationFailed after cfg.max_retries rejected samples.
Clip generate_clip(const SyntheticWorldConfig& cfg, std::uint64_t rng_seed);
GeneratedClip generate_clip_with_poses(const SyntheticWorldConfig& cfg,
                                       std::uint64_t rng_seed);

/// Draws one clip length from the configured distribution.
int sample_clip_length(const SyntheticWorldConfig& cfg, std::uint64_t rng_seed);

/// Ratios for (train, val, test_seen, test_unseen).
struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test_seen = 0.1;
  double test_unseen = 0.0;
};

struct DatasetSplits {
  std::vector<Clip> train;
  std::vector<Clip> val;
  std::vector<Clip> test_seen;
  std::vector<Clip> test_unseen;
};

/// Deterministic partition. Whole scenes are held out for test_unseen;
/// training clips keep their last kTrainClipCap frames. Throws SplitError.
DatasetSplits split_dataset(std::vector<Clip> clips, const SplitRatios& ratios,
                            std::uint64_t rng_seed);

/// A whole synthetic benchmark: `num_clips` clips spread round-robin over
/// `num_scenes` scenes, then partitioned. Everything derives from world.seed.
struct GenerateConfig {
  SyntheticWorldConfig world;
  int num_clips = 500;
  int num_scenes = 10;
  SplitRatios ratios;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

DatasetSplits generate_dataset(const GenerateConfig& cfg);

/// Keeps the trailing `cap` frames so the clip still ends at the target.
Clip cap_clip(Clip clip, int cap = kTrainClipCap);

// On-disk format: one directory per clip holding meta.json, landmarks.csv
// (T x 43), targets.csv (T x 3) and visual.npy (T x H x W x C, <f4).
void save_clip(const Clip& clip, const std::filesystem::path& dir);
/// Throws FormatError naming the offending file or field.
Clip load_clip(const std::filesystem::path& dir);

/// Saves each clip under `root/<clip.id>`.
void save_dataset(const std::vector<Clip>& clips,
                  const std::filesystem::path& root);
/// Loads every clip directory under `root`, sorted by name.
std::vector<Clip> load_dataset(const std::filesystem::path& root);

}  // namespace egotarget
