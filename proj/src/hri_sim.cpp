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

#include "egotarget/hri_sim.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "egotarget/error.hpp"
#include "egotarget/io_util.hpp"

namespace egotarget {

std::string_view to_string(SimMode mode) {
  return mode == SimMode::kAvoid ? "avoid" : "reach";
}

SimMode parse_sim_mode(std::string_view name) {
  if (name == "avoid") return SimMode::kAvoid;
  if (name == "reach") return SimMode::kReach;
  throw DomainError("unknown simulation mode '" + std::string(name) + "'");
}

void WorkspaceSim::validate() const {
  if (!(radius > 0.0)) throw DomainError("simulator radius must be > 0");
  if (!(max_speed > 0.0)) throw DomainError("simulator speed must be > 0");
  if (!end_effector.allFinite()) throw DomainError("effector must be finite");
}

SimAction sim_step(WorkspaceSim& sim, const Eigen::Vector3d& predicted_target) {
  SimAction a{sim.end_effector, sim.end_effector, false};
  const Eigen::Vector3d diff = predicted_target - sim.end_effector;
  const double dist = diff.norm();
  if (sim.mode == SimMode::kAvoid) {
    if (dist >= sim.radius) return a;
    const Eigen::Vector3d away = dist > 0.0 ? Eigen::Vector3d(-diff / dist)
                                            : Eigen::Vector3d::UnitZ();
    sim.end_effector += sim.max_speed * away;
  } else {
    if (dist == 0.0) return a;
    if (dist <= sim.max_speed) {
      sim.end_effector = predicted_target;
    } else {
      sim.end_effector += (sim.max_speed / dist) * diff;
    }
  }
  a.after = sim.end_effector;
  a.moved = true;
  return a;
}

Episode run_episode(WorkspaceSim sim, const std::vector<Eigen::Vector3d>& predictions,
                    const std::vector<Eigen::Vector3d>& truth) {
  sim.validate();
  if (predictions.empty()) throw DomainError("run_episode: empty prediction stream");
  if (truth.size() != predictions.size()) {
    throw DomainError("run_episode: truth and prediction lengths differ");
  }
  Episode ep;
  ep.summary.min_clearance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    EpisodeStep s;
    s.step = static_cast<int>(k);
    if (k > 0) {
      s.prediction = predictions[k - 1];
      const SimAction a = sim_step(sim, *s.prediction);
      ep.summary.path_length += (a.after - a.before).norm();
    }
    s.effector = sim.end_effector;
    s.truth = truth[k];
    s.clearance = (truth[k] - sim.end_effector).norm();
    s.violated = sim.mode == SimMode::kAvoid && s.clearance < sim.radius;
    // Step 0 precedes any possible reaction and is not counted.
    if (k > 0 && s.violated) ++ep.summary.violations;
    ep.summary.min_clearance = std::min(ep.summary.min_clearance, s.clearance);
    ep.steps.push_back(s);
  }
  return ep;
}

void write_episode_jsonl(const Episode& episode, const std::filesystem::path& path) {
  auto arr = [](const Eigen::Vector3d& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
  std::ostringstream ss;
  for (const EpisodeStep& s : episode.steps) {
    nlohmann::json j{{"step", s.step},
                     {"prediction", s.prediction ? arr(*s.prediction) : nlohmann::json()},
                     {"effector", arr(s.effector)},
                     {"truth", arr(s.truth)},
                     {"clearance", s.clearance},
                     {"violated", s.violated}};
    ss << j.dump() << '\n';
  }
  nlohmann::json summary{{"summary",
                          {{"violations", episode.summary.violations},
                           {"min_clearance", episode.summary.min_clearance},
                           {"path_length", episode.summary.path_length}}}};
  ss << summary.dump() << '\n';
  write_text_file(path, ss.str());
}

}  // namespace egotarget
