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

// Ten-stage evaluation: every clip is cut into ten consecutive frame groups
// (leftover frames go to the earliest groups) and per-frame centimeter errors
// are averaged per group and overall.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "egotarget/data.hpp"
#include "egotarget/model.hpp"

namespace egotarget {

inline constexpr int kNumStages = 10;

struct StageSplit {
  std::array<int, kNumStages> sizes{};
  std::vector<int> stage_of_frame;
};

/// Throws DomainError for T < 1.
StageSplit stage_split(int length);

/// 100 * ||pred - gt|| with both in meters.
double frame_error_cm(const Eigen::Vector3d& pred, const Eigen::Vector3d& gt);

struct StageReport {
  std::string model = "model";
  std::string modality = "RGB+Hand";
  std::string split;
  int num_clips = 0;
  int num_seeds = 1;
  double overall = 0.0;
  // NaN for a stage with no frames in any clip.
  std::array<double, kNumStages> stages{};

  bool operator==(const StageReport&) const = default;
};

/// Per-frame predictions in meters, in each frame's own camera coordinates.
using ClipPredictor = std::function<std::vector<Eigen::Vector3d>(const Clip&)>;

/// Stage means over non-empty (clip, stage) groups; overall is the mean over
/// every frame. Throws DomainError on an empty clip list or a predictor that
/// returns the wrong number of frames.
StageReport evaluate_predictor(const std::vector<Clip>& clips,
                               const ClipPredictor& predictor);

/// Arithmetic mean of the overall and stage values; metadata from the first.
StageReport average_reports(const std::vector<StageReport>& reports);

struct EvalOptions {
  bool post_process = true;
  int fingertip_index = kIndexFingertip;
};

/// Causal per-frame predictions (meters), optionally post-processed.
std::vector<Eigen::Vector3d> predict_clip(const Model& model, const Clip& clip,
                                          const EvalOptions& options = {});

/// One report per seed checkpoint, averaged.
StageReport evaluate(const std::vector<Model>& seed_models,
                     const std::vector<Clip>& clips, const EvalOptions& options = {});

/// Uniform per-axis guesses inside the bounding box of the training labels.
/// Throws DomainError when `train_labels` is empty.
StageReport random_baseline(const std::vector<Eigen::Vector3d>& train_labels,
                            const std::vector<Clip>& clips, std::uint64_t rng_seed);

/// Every frame target of every clip.
std::vector<Eigen::Vector3d> collect_labels(const std::vector<Clip>& clips);

// Report CSV: one "# meta,<model>,<split>,<clips>,<seeds>" comment line per
// report, a header "model,modality,overall,s10,...,s100" and one row per
// report.
void write_report_csv(const std::vector<StageReport>& reports,
                      const std::filesystem::path& path);
std::string report_csv(const std::vector<StageReport>& reports);
/// Throws FormatError on malformed content.
std::vector<StageReport> read_report_csv(const std::filesystem::path& path);
std::vector<StageReport> parse_report_csv(const std::string& text);

}  // namespace egotarget
