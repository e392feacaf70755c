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

#include "egotarget/postprocess.hpp"

#include <algorithm>

#include "egotarget/error.hpp"

namespace egotarget {

PostStepResult post_step(const Eigen::Vector3d& raw_point,
                         const HandLandmarks& landmarks, const CameraIntrinsics& k,
                         const PostProcessState& state, PostProcessState& next,
                         int fingertip_index) {
  if (!(raw_point.z() > 0.0)) {
    throw DegenerateProjection("post_step: raw prediction depth must be positive");
  }
  const Eigen::Vector2d projected = project(raw_point, k);
  next = state;
  PostStepResult out{raw_point, projected, 1.0};
  if (!landmarks.present) return out;

  const Eigen::Vector2d tip = landmarks.fingertip(fingertip_index);
  next.initialized = true;
  next.prev_hand = tip;
  if (!state.prev_hand) return out;

  const double offset = (tip - *state.prev_hand).norm();
  next.max_offset = std::max(state.max_offset, offset);
  if (next.max_offset <= 0.0) return out;

  const double alpha = offset / next.max_offset;
  out.alpha = alpha;
  if (alpha == 1.0) return out;
  out.blended = alpha * projected + (1.0 - alpha) * tip;
  out.point = unproject(out.blended, raw_point.z(), k);
  return out;
}

PostProcessState reset(const PostProcessState&) { return PostProcessState{}; }

}  // namespace egotarget
