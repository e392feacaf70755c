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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "egotarget/data.hpp"
#include "egotarget/model.hpp"
#include "egotarget/postprocess.hpp"

namespace egotarget {

struct FramePrediction {
  int frame = 0;                   // 0-based index within the stream
  Eigen::Vector3d raw_point_norm;  // normalized workspace units
  Eigen::Vector3d raw_point_m;     // meters, current camera frame
  Eigen::Vector3d final_point_m;   // after the hand prior
  Eigen::Vector2d hand_pred_px;
  double time_pred = 0.0;
};

/// {"frame", "raw_point_m", "final_point_m", "hand_pred_px", "time_pred",
///  "raw_point_norm"} on one line.
std::string to_json_line(const FramePrediction& p);

struct TimingStats {
  int frames = 0;  // frames inside the timed window
  double seconds = 0.0;
  double fps() const { return seconds > 0.0 ? frames / seconds : 0.0; }
};

/// Online inference over one stream. Sessions share read-only weights but
/// never state.
class StreamSession {
 public:
  static constexpr int kWarmupFrames = 10;

  explicit StreamSession(std::shared_ptr<const Model> model,
                         int fingertip_index = kIndexFingertip);
  /// Throws CheckpointError when the checkpoint is missing or corrupt.
  static StreamSession open(const std::filesystem::path& checkpoint);

  /// Throws ShapeError when the frame does not match the model input.
  FramePrediction push_frame(const Frame& frame, const CameraIntrinsics& k);

  int frame_count() const { return frames_; }
  const RecurrentState& recurrent_state() const { return recurrent_; }
  const PostProcessState& post_state() const { return post_; }
  const TimingStats& timing() const { return timing_; }
  const Model& model() const { return *model_; }

  /// Exact (round-trip) snapshot of the mutable state.
  nlohmann::json save_state() const;
  /// Throws FormatError when the snapshot does not fit the model.
  void load_state(const nlohmann::json& state);

 private:
  std::shared_ptr<const Model> model_;
  int fingertip_index_;
  RecurrentState recurrent_;
  PostProcessState post_;
  int frames_ = 0;
  TimingStats timing_;
};

/// Pushes every frame of the clip through `session`.
std::vector<FramePrediction> stream_clip(StreamSession& session, const Clip& clip);

}  // namespace egotarget
