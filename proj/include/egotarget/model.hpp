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

// Target-prediction network: visual encoder, hand-landmark encoder, fusion
// MLP, two-layer LSTM, three per-axis grid-score heads decoded by masked
// expectation, plus auxiliary fingertip-position and time-fraction heads.

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "egotarget/data.hpp"
#include "egotarget/geometry.hpp"

namespace egotarget {

/// Per-axis discretization of [-1, 1] into `bins` cells.
struct GridSpec {
  int bins = 1024;
  // Mask threshold; unset means 1 / bins.
  std::optional<double> gamma;

  double threshold() const { return gamma.value_or(1.0 / bins); }
  /// Bin centers -1 + (2i + 1) / bins.
  Eigen::VectorXd centers() const;
  void validate() const;
};

enum class VisualEncoderKind {
  kConv4,     // 4 strided 3x3 conv blocks over an H x W x 3 image
  kFeatures,  // frame carries a precomputed feature vector (1 x 1 x D)
};

struct ModelConfig {
  VisualShape input_shape;
  VisualEncoderKind encoder = VisualEncoderKind::kConv4;
  std::array<int, 4> conv_channels{16, 32, 64, 64};
  // Appends normalized x and y pixel coordinates as two extra input planes.
  bool coord_channels = false;
  int visual_dim = 128;
  int hand_hidden = 64;
  int hand_dim = 32;
  int fused_dim = 128;
  int lstm_layers = 2;
  int lstm_hidden = 128;
  int head_hidden = 64;
  int aux_hidden = 32;
  GridSpec grid;
  // Ablation switch: when false the hand feature h_t is fed as zeros.
  bool use_hand_features = true;
  WorkspaceBox workspace;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Spatial side of the conv output after `block` (0-based) blocks.
  int conv_side(int block) const;
  /// Planes seen by the first conv block.
  int conv_input_channels() const;
  int visual_input_dim() const;
};

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct LstmLayer {
  Eigen::MatrixXd w_input;   // 4H x in, gate order (i, f, g, o)
  Eigen::MatrixXd w_hidden;  // 4H x H
  Eigen::VectorXd bias;      // 4H
};

/// Every trainable tensor, addressable by a stable dotted name.
struct ModelParams {
  std::array<Linear, 4> conv;  // weight Cout x (Cin * 9); unused for kFeatures
  Linear visual_fc;
  Linear hand_fc1;
  Linear hand_fc2;
  Linear fuse;
  std::vector<LstmLayer> lstm;
  std::array<Linear, 3> axis_fc1;
  std::array<Linear, 3> axis_fc2;
  Linear time_fc1;
  Linear time_fc2;
  Linear hand_pos_fc1;
  Linear hand_pos_fc2;

  /// Calls f(name, tensor) for every non-empty tensor in a fixed order.
  /// `tensor` is an Eigen::MatrixXd& or Eigen::VectorXd&.
  template <typename F>
  void for_each(F&& f);
  template <typename F>
  void for_each(F&& f) const;

  /// Same shapes, all zeros.
  ModelParams zeros_like() const;
  std::size_t num_scalars() const;
};

/// Hidden and cell vectors per LSTM layer.
struct RecurrentState {
  std::vector<Eigen::VectorXd> hidden;
  std::vector<Eigen::VectorXd> cell;

  static RecurrentState zeros(const ModelConfig& cfg);
  bool operator==(const RecurrentState&) const = default;
};

struct FrameOutput {
  std::array<Eigen::VectorXd, 3> scores;  // softmax scores per axis
  Eigen::Vector3d raw_point;              // normalized units
  Eigen::Vector2d hand_pred;              // pixels
  double time_pred = 0.0;                 // in [0, 1]
};

class Model {
 public:
  /// Allocates zero weights; throws ConfigError on an invalid config.
  explicit Model(ModelConfig cfg);
  /// Fan-in scaled uniform initialization, values rounded to float32.
  static Model initialize(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  const Eigen::VectorXd& grid_centers() const { return grid_centers_; }

  /// v_t. Throws ShapeError when the input size does not match the config.
  Eigen::VectorXd encode_visual(const Eigen::VectorXf& visual) const;
  /// h_t from the 42 stacked landmarks, divided by the image resolution.
  Eigen::VectorXd encode_hand(const HandLandmarks& landmarks,
                              const CameraIntrinsics& k) const;
  /// u_t = MLP(cat(v_t, h_t)).
  Eigen::VectorXd fuse(const Eigen::VectorXd& visual,
                       const Eigen::VectorXd& hand) const;
  /// One LSTM step. Returns the top-layer output and the next state.
  std::pair<Eigen::VectorXd, RecurrentState> step(
      const Eigen::VectorXd& fused, const RecurrentState& state) const;
  /// Softmax-normalized scores for x, y, z.
  std::array<Eigen::VectorXd, 3> score_heads(const Eigen::VectorXd& core) const;
  /// Fingertip position in resolution-normalized [0, 1]^2 coordinates.
  Eigen::Vector2d hand_head(const Eigen::VectorXd& visual) const;
  double time_head(const Eigen::VectorXd& core) const;

  /// Full per-frame pipeline; advances `state`.
  FrameOutput infer_frame(const Frame& frame, const CameraIntrinsics& k,
                          RecurrentState& state) const;

  /// Rounds every parameter to the nearest float32 value.
  void round_to_float();

 private:
  ModelConfig cfg_;
  ModelParams params_;
  Eigen::VectorXd grid_centers_;
};

/// Masked expectation over bin centers: keep bins with score > gamma,
/// renormalize, take the dot product with the centers. Falls back to the
/// unmasked expectation when no bin survives.
double decode(const Eigen::VectorXd& scores, const GridSpec& grid);
/// Same with precomputed centers.
double decode(const Eigen::VectorXd& scores, const Eigen::VectorXd& centers,
              double gamma);

/// Causal per-frame inference over a whole clip from l_0 = 0.
std::vector<FrameOutput> forward_clip(const Model& model, const Clip& clip);

// ---------------------------------------------------------------------------
// Whole-sequence path used for training. Numerically equivalent to
// infer_frame() applied frame by frame (up to summation order).

struct SequenceCache;

struct SequenceOutputs {
  Eigen::Matrix3Xd raw_points;  // normalized
  Eigen::Matrix2Xd hand_norm;   // [0, 1]^2 fingertip estimate
  Eigen::RowVectorXd time_pred;
  std::array<Eigen::MatrixXd, 3> scores;  // G x T per axis
};

class SequenceForward {
 public:
  /// Runs the first `length` frames of `clip` (all when length < 0).
  SequenceForward(const Model& model, const Clip& clip, int length = -1);
  ~SequenceForward();
  SequenceForward(SequenceForward&&) noexcept;
  SequenceForward& operator=(SequenceForward&&) noexcept;

  const SequenceOutputs& outputs() const { return outputs_; }
  int length() const;

  /// Accumulates parameter gradients into `grads` given the loss gradient
  /// with respect to each output.
  void backward(const Eigen::Matrix3Xd& d_points, const Eigen::Matrix2Xd& d_hand,
                const Eigen::RowVectorXd& d_time, ModelParams& grads) const;

 private:
  const Model* model_;
  std::unique_ptr<SequenceCache> cache_;
  SequenceOutputs outputs_;
};

// ---------------------------------------------------------------------------

template <typename F>
void ModelParams::for_each(F&& f) {
  auto lin = [&f](const std::string& name, Linear& l) {
    if (l.weight.size() > 0) f(name + ".weight", l.weight);
    if (l.bias.size() > 0) f(name + ".bias", l.bias);
  };
  for (int i = 0; i < 4; ++i) lin("visual.conv" + std::to_string(i), conv[i]);
  lin("visual.fc", visual_fc);
  lin("hand.fc1", hand_fc1);
  lin("hand.fc2", hand_fc2);
  lin("fuse", fuse);
  for (std::size_t i = 0; i < lstm.size(); ++i) {
    const std::string p = "lstm.layer" + std::to_string(i);
    f(p + ".w_input", lstm[i].w_input);
    f(p + ".w_hidden", lstm[i].w_hidden);
    f(p + ".bias", lstm[i].bias);
  }
  static constexpr const char* kAxis[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    lin(std::string("head_") + kAxis[a] + ".fc1", axis_fc1[a]);
    lin(std::string("head_") + kAxis[a] + ".fc2", axis_fc2[a]);
  }
  lin("time.fc1", time_fc1);
  lin("time.fc2", time_fc2);
  lin("hand_pos.fc1", hand_pos_fc1);
  lin("hand_pos.fc2", hand_pos_fc2);
}

template <typename F>
void ModelParams::for_each(F&& f) const {
  const_cast<ModelParams*>(this)->for_each(
      [&f](const std::string& name, const auto& t) { f(name, t); });
}

}  // namespace egotarget
