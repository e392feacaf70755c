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

// Free-flying point effector that consumes streamed target predictions,
// either keeping a safety ball clear of the predicted target or reaching it
// along a straight line.

#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace egotarget {

enum class SimMode { kAvoid, kReach };

std::string_view to_string(SimMode mode);
/// Throws DomainError on anything but "avoid" or "reach".
SimMode parse_sim_mode(std::string_view name);

struct WorkspaceSim {
  Eigen::Vector3d end_effector = Eigen::Vector3d::Zero();
  double radius = 0.15;     // m, avoid ball
  double max_speed = 0.2;   // m per step
  SimMode mode = SimMode::kAvoid;

  /// Throws DomainError unless radius > 0 and max_speed > 0.
  void validate() const;
};

struct SimAction {
  Eigen::Vector3d before;
  Eigen::Vector3d after;
  bool moved = false;
};

/// Moves at most max_speed. Avoid: if the target is inside the ball, step
/// straight away from it (+z when it coincides with the effector). Reach:
/// step toward the target, landing on it when it is within one step.
SimAction sim_step(WorkspaceSim& sim, const Eigen::Vector3d& predicted_target);

struct EpisodeStep {
  int step = 0;
  std::optional<Eigen::Vector3d> prediction;  // acted on this step
  Eigen::Vector3d effector;                   // after acting
  Eigen::Vector3d truth;                      // true target at this step
  double clearance = 0.0;                     // ||truth - effector||
  bool violated = false;                      // avoid mode: clearance < radius
};

struct EpisodeSummary {
  int violations = 0;  // violated steps from step 1 on
  double min_clearance = 0.0;
  double path_length = 0.0;
};

struct Episode {
  std::vector<EpisodeStep> steps;
  EpisodeSummary summary;
};

/// Runs one episode with a one-step reaction delay: the effector acts at
/// step k on the prediction emitted at step k - 1 and stays put at step 0.
/// `truth` gives the true target per step for the safety metrics and must
/// match `predictions` in length. Throws DomainError on an empty stream.
Episode run_episode(WorkspaceSim sim, const std::vector<Eigen::Vector3d>& predictions,
                    const std::vector<Eigen::Vector3d>& truth);

/// One JSON object per step.
void write_episode_jsonl(const Episode& episode, const std::filesystem::path& path);

}  // namespace egotarget
