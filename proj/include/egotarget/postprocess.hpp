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

// Hand-motion prior applied to each raw prediction at inference time.
//
// The raw 3D prediction is projected to pixels and blended with the observed
// index fingertip:
//
//   blended = alpha * projected + (1 - alpha) * fingertip,
//   alpha   = step / max_step,
//
// where `step` is the fingertip's pixel displacement since the previous frame
// and `max_step` its running maximum (updated with the current step before
// alpha is formed, so alpha <= 1). The blended pixel is lifted back to 3D at
// the raw prediction's depth. Frames without a detected hand, the first hand
// frame, and streams whose hand has not moved yet pass the raw prediction
// through unchanged and leave the history untouched (except for recording
// the first fingertip).

#pragma once

#include <optional>

#include <Eigen/Core>

#include "egotarget/data.hpp"
#include "egotarget/geometry.hpp"

namespace egotarget {

struct PostProcessState {
  std::optional<Eigen::Vector2d> prev_hand;
  double max_offset = 0.0;
  bool initialized = false;

  bool operator==(const PostProcessState&) const = default;
};

struct PostStepResult {
  Eigen::Vector3d point;    // meters
  Eigen::Vector2d blended;  // pixels
  double alpha = 1.0;       // weight on the model's projected prediction
};

/// Pure step: returns the adjusted point and writes the advanced history to
/// `next`. Throws DegenerateProjection when raw_point.z() <= 0.
PostStepResult post_step(const Eigen::Vector3d& raw_point,
                         const HandLandmarks& landmarks, const CameraIntrinsics& k,
                         const PostProcessState& state, PostProcessState& next,
                         int fingertip_index = kIndexFingertip);

PostProcessState reset(const PostProcessState& state);

}  // namespace egotarget
