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

#include "egotarget/losses.hpp"

#include <numeric>
#include <string>

#include "egotarget/error.hpp"

namespace egotarget {

void LossConfig::validate() const {
  if (!(delta >= 0.0)) throw ConfigError("delta", "must be >= 0");
  if (!(truncation_cap > 0.0)) throw ConfigError("truncation_cap", "must be > 0");
  if (!(weight_end > 0.0)) throw ConfigError("weight_end", "must be > 0");
  if (!(weight_start >= weight_end)) {
    throw ConfigError("weight_start", "must be >= weight_end");
  }
  if (fingertip_index < 0 || fingertip_index >= kNumLandmarks) {
    throw ConfigError("fingertip_index", "must be in [0, 21)");
  }
}

double LossBreakdown::position_sum() const {
  return std::accumulate(position.begin(), position.end(), 0.0);
}
double LossBreakdown::hand_sum() const {
  return std::accumulate(hand.begin(), hand.end(), 0.0);
}
double LossBreakdown::time_sum() const {
  return std::accumulate(time.begin(), time.end(), 0.0);
}

std::vector<double> frame_weights(int length, const LossConfig& cfg) {
  if (length < 1) throw DomainError("frame_weights: T must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(length), cfg.weight_start);
  for (int t = 1; t < length; ++t) {
    w[t] = cfg.weight_start -
           (cfg.weight_start - cfg.weight_end) * t / static_cast<double>(length - 1);
  }
  return w;
}

double p_loss(const Eigen::Vector3d& raw_point, const Eigen::Vector3d& target,
              const LossConfig& cfg) {
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = raw_point[a] - target[a];
    sum += std::min(e * e, cfg.truncation_cap);
  }
  return sum;
}

namespace {

Eigen::Vector2d fingertip_normalized(const HandLandmarks& lm, int width, int height,
                                     int fingertip_index) {
  const Eigen::Vector2d& tip = lm.fingertip(fingertip_index);
  return {tip.x() / width, tip.y() / height};
}

}  // namespace

double hand_loss(const Eigen::Vector2d& hand_pred_px, const HandLandmarks& landmarks,
                 int width, int height, int fingertip_index) {
  if (!landmarks.present) return 0.0;
  const Eigen::Vector2d pred(hand_pred_px.x() / width, hand_pred_px.y() / height);
  return (pred - fingertip_normalized(landmarks, width, height, fingertip_index))
      .squaredNorm();
}

double time_loss(double time_pred, int t, int length) {
  if (length < 1 || t < 1 || t > length) {
    throw DomainError("time_loss: need 1 <= t <= T, got t=" + std::to_string(t) +
                      ", T=" + std::to_string(length));
  }
  const double e = time_pred - static_cast<double>(t) / length;
  return e * e;
}

namespace {

void finish(LossBreakdown& out, const LossConfig& cfg) {
  out.total = 0.0;
  for (std::size_t t = 0; t < out.weights.size(); ++t) {
    out.total += out.weights[t] *
                 (out.position[t] + cfg.delta * (out.hand[t] + out.time[t]));
  }
}

}  // namespace

LossBreakdown total_loss(const std::vector<FrameOutput>& outputs, const Clip& clip,
                         const LossConfig& cfg, const WorkspaceBox& workspace) {
  const int t_len = clip.length();
  if (static_cast<int>(outputs.size()) != t_len) {
    throw ShapeError("total_loss: " + std::to_string(outputs.size()) +
                     " outputs for a clip of length " + std::to_string(t_len));
  }
  LossBreakdown out;
  out.weights = frame_weights(t_len, cfg);
  for (int t = 0; t < t_len; ++t) {
    const Frame& f = clip.frames[t];
    out.position.push_back(
        p_loss(outputs[t].raw_point, workspace.to_normalized(f.target_gt), cfg));
    out.hand.push_back(cfg.use_hand_loss
                           ? hand_loss(outputs[t].hand_pred, f.landmarks,
                                       clip.intrinsics.width, clip.intrinsics.height,
                                       cfg.fingertip_index)
                           : 0.0);
    out.time.push_back(cfg.use_time_loss ? time_loss(outputs[t].time_pred, t + 1, t_len)
                                         : 0.0);
  }
  finish(out, cfg);
  return out;
}

LossBreakdown sequence_loss(const SequenceOutputs& outputs, const Clip& clip,
                            const LossConfig& cfg, const WorkspaceBox& workspace,
                            SequenceLossGradient* grad) {
  const int t_len = static_cast<int>(outputs.raw_points.cols());
  if (t_len < 1 || t_len > clip.length()) {
    throw ShapeError("sequence_loss: outputs do not fit the clip");
  }
  LossBreakdown out;
  out.weights = frame_weights(t_len, cfg);
  if (grad) {
    grad->d_points = Eigen::Matrix3Xd::Zero(3, t_len);
    grad->d_hand = Eigen::Matrix2Xd::Zero(2, t_len);
    grad->d_time = Eigen::RowVectorXd::Zero(t_len);
  }
  const CameraIntrinsics& k = clip.intrinsics;
  for (int t = 0; t < t_len; ++t) {
    const Frame& f = clip.frames[t];
    const double w = out.weights[t];
    const Eigen::Vector3d target = workspace.to_normalized(f.target_gt);
    const Eigen::Vector3d pred = outputs.raw_points.col(t);
    out.position.push_back(p_loss(pred, target, cfg));

    double lh = 0.0;
    if (cfg.use_hand_loss && f.landmarks.present) {
      const Eigen::Vector2d diff =
          outputs.hand_norm.col(t) -
          fingertip_normalized(f.landmarks, k.width, k.height, cfg.fingertip_index);
      lh = diff.squaredNorm();
      if (grad) grad->d_hand.col(t) = w * cfg.delta * 2.0 * diff;
    }
    out.hand.push_back(lh);

    double lt = 0.0;
    if (cfg.use_time_loss) {
      const double e = outputs.time_pred[t] - static_cast<double>(t + 1) / t_len;
      lt = e * e;
      if (grad) grad->d_time[t] = w * cfg.delta * 2.0 * e;
    }
    out.time.push_back(lt);

    if (grad) {
      for (int a = 0; a < 3; ++a) {
        const double e = pred[a] - target[a];
        if (e * e < cfg.truncation_cap) grad->d_points(a, t) = w * 2.0 * e;
      }
    }
  }
  finish(out, cfg);
  return out;
}

}  // namespace egotarget
