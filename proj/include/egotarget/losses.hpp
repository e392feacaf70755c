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

#include <vector>

#include <Eigen/Core>

#include "egotarget/data.hpp"
#include "egotarget/model.hpp"

namespace egotarget {

struct LossConfig {
  double delta = 0.1;           // weight of the two auxiliary losses
  double truncation_cap = 1.0;  // per-axis clamp on the squared error
  double weight_start = 2.0;
  double weight_end = 1.0;
  bool use_hand_loss = true;
  bool use_time_loss = true;
  int fingertip_index = kIndexFingertip;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> position;  // L^p per frame
  std::vector<double> hand;      // L^Hand per frame
  std::vector<double> time;      // L^Time per frame
  std::vector<double> weights;   // w_t

  double position_sum() const;
  double hand_sum() const;
  double time_sum() const;
};

/// Linear frame weights from weight_start (first frame) to weight_end (last).
/// Throws DomainError for T < 1.
std::vector<double> frame_weights(int length, const LossConfig& cfg);

/// Truncated squared error: per-axis squared error clamped at the cap, summed.
double p_loss(const Eigen::Vector3d& raw_point, const Eigen::Vector3d& target,
              const LossConfig& cfg);

/// Squared fingertip error in resolution-normalized coordinates; exactly 0
/// when no hand is present.
double hand_loss(const Eigen::Vector2d& hand_pred_px, const HandLandmarks& landmarks,
                 int width, int height, int fingertip_index = kIndexFingertip);

/// (time_pred - t / T)^2 with 1-based t. Throws DomainError unless 1 <= t <= T.
double time_loss(double time_pred, int t, int length);

/// Weighted objective over per-frame outputs. Throws ShapeError when the
/// number of outputs differs from the clip length.
LossBreakdown total_loss(const std::vector<FrameOutput>& outputs, const Clip& clip,
                         const LossConfig& cfg, const WorkspaceBox& workspace);

struct SequenceLossGradient {
  Eigen::Matrix3Xd d_points;
  Eigen::Matrix2Xd d_hand;
  Eigen::RowVectorXd d_time;
};

/// Objective over a SequenceForward result (the first outputs.cols() frames
/// of `clip`, with T taken as that prefix length). Fills `grad` if non-null.
LossBreakdown sequence_loss(const SequenceOutputs& outputs, const Clip& clip,
                            const LossConfig& cfg, const WorkspaceBox& workspace,
                            SequenceLossGradient* grad);

}  // namespace egotarget
