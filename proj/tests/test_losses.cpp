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

#include <cmath>

#include <gtest/gtest.h>

#include "egotarget/error.hpp"
#include "egotarget/losses.hpp"
#include "egotarget/model.hpp"
#include "test_util.hpp"

namespace egotarget {
namespace {

using testing::random_clip;
using testing::toy_conv_config;

TEST(FrameWeightsTest, Endpoints) {
  const LossConfig cfg;
  EXPECT_EQ(frame_weights(1, cfg), std::vector<double>({2.0}));
  EXPECT_EQ(frame_weights(2, cfg), std::vector<double>({2.0, 1.0}));
  EXPECT_EQ(frame_weights(3, cfg), std::vector<double>({2.0, 1.5, 1.0}));
}

TEST(FrameWeightsTest, MidpointOfTwentyFive) {
  const auto w = frame_weights(25, LossConfig{});
  EXPECT_DOUBLE_EQ(w[12], 1.5);
  EXPECT_DOUBLE_EQ(w.front(), 2.0);
  EXPECT_DOUBLE_EQ(w.back(), 1.0);
}

TEST(FrameWeightsTest, RejectsEmpty) {
  EXPECT_THROW(frame_weights(0, LossConfig{}), DomainError);
}

TEST(PLossTest, SquaredError) {
  const LossConfig cfg;
  EXPECT_EQ(p_loss({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, cfg), 0.0);
  EXPECT_NEAR(p_loss({0.1, 0.0, 0.0}, {0.0, 0.0, 0.0}, cfg), 0.01, 1e-15);
}

TEST(PLossTest, ClampsEachAxis) {
  LossConfig cfg;
  cfg.truncation_cap = 0.25;
  EXPECT_DOUBLE_EQ(p_loss({1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, cfg), 0.25);
  // 0.25 (clamped) + 0.04 + 0.
  EXPECT_NEAR(p_loss({1.0, 0.2, 0.0}, {-1.0, 0.0, 0.0}, cfg), 0.29, 1e-15);
}

TEST(HandLossTest, Cases) {
  HandLandmarks lm;
  EXPECT_EQ(hand_loss({500.0, 500.0}, lm, 1920, 1080), 0.0);
  lm.present = true;
  lm.points[kIndexFingertip] = {960.0, 540.0};
  EXPECT_EQ(hand_loss({960.0, 540.0}, lm, 1920, 1080), 0.0);
  // Normalized offset (0.1, 0.2): 0.01 + 0.04.
  EXPECT_NEAR(hand_loss({960.0 + 192.0, 540.0 + 216.0}, lm, 1920, 1080), 0.05, 1e-15);
}

TEST(TimeLossTest, Cases) {
  EXPECT_EQ(time_loss(0.2, 5, 25), 0.0);
  EXPECT_NEAR(time_loss(0.3, 5, 25), 0.01, 1e-15);
  EXPECT_EQ(time_loss(1.0, 25, 25), 0.0);
  EXPECT_THROW(time_loss(0.5, 0, 25), DomainError);
  EXPECT_THROW(time_loss(0.5, 26, 25), DomainError);
}

TEST(TotalLossTest, MatchesRecomputation) {
  const Model m = Model::initialize(toy_conv_config(), 4);
  const Clip clip = random_clip(m.config().input_shape, 7, 5, 2);
  const LossConfig cfg;
  const auto out = forward_clip(m, clip);
  const LossBreakdown b = total_loss(out, clip, cfg, m.config().workspace);
  double sum = 0.0;
  for (int t = 0; t < 7; ++t) {
    const double w = 2.0 - t / 6.0;
    const Eigen::Vector3d e =
        out[t].raw_point - m.config().workspace.to_normalized(clip.frames[t].target_gt);
    double p = 0.0;
    for (int a = 0; a < 3; ++a) p += std::min(e[a] * e[a], 1.0);
    double h = 0.0;
    if (clip.frames[t].landmarks.present) {
      const Eigen::Vector2d tip = clip.frames[t].landmarks.points[kIndexFingertip];
      h = std::pow((out[t].hand_pred.x() - tip.x()) / clip.intrinsics.width, 2) +
          std::pow((out[t].hand_pred.y() - tip.y()) / clip.intrinsics.height, 2);
    }
    const double tl = std::pow(out[t].time_pred - (t + 1) / 7.0, 2);
    EXPECT_NEAR(b.position[t], p, 1e-12);
    EXPECT_NEAR(b.hand[t], h, 1e-12);
    EXPECT_NEAR(b.time[t], tl, 1e-12);
    sum += w * (p + 0.1 * (h + tl));
  }
  EXPECT_NEAR(b.total, sum, 1e-9);
}

TEST(TotalLossTest, DeltaIsLinear) {
  const Model m = Model::initialize(toy_conv_config(), 4);
  const Clip clip = random_clip(m.config().input_shape, 6, 6, 1);
  const auto out = forward_clip(m, clip);
  auto total = [&](double delta) {
    LossConfig cfg;
    cfg.delta = delta;
    return total_loss(out, clip, cfg, m.config().workspace).total;
  };
  const double base = total(0.0);
  const double d1 = total(0.1) - base;
  EXPECT_GT(d1, 0.0);
  EXPECT_NEAR(total(0.3) - base, 3.0 * d1, 1e-12);
  EXPECT_NEAR(total(1.0) - base, 10.0 * d1, 1e-12);
}

TEST(TotalLossTest, DeltaZeroKeepsOnlyPosition) {
  const Model m = Model::initialize(toy_conv_config(), 4);
  const Clip clip = random_clip(m.config().input_shape, 4, 6, 1);
  LossConfig cfg;
  cfg.delta = 0.0;
  const LossBreakdown b = total_loss(forward_clip(m, clip), clip, cfg, m.config().workspace);
  double expect = 0.0;
  for (int t = 0; t < 4; ++t) expect += b.weights[t] * b.position[t];
  EXPECT_NEAR(b.total, expect, 1e-12);
}

TEST(TotalLossTest, LengthMismatchThrows) {
  const Model m = Model::initialize(toy_conv_config(), 4);
  const Clip clip = random_clip(m.config().input_shape, 4, 6, 1);
  auto out = forward_clip(m, clip);
  out.pop_back();
  EXPECT_THROW(total_loss(out, clip, LossConfig{}, m.config().workspace), ShapeError);
}

TEST(SequenceLossTest, AgreesWithPerFrameLoss) {
  const Model m = Model::initialize(toy_conv_config(), 8);
  const Clip clip = random_clip(m.config().input_shape, 6, 9, 2);
  const LossConfig cfg;
  const double a = total_loss(forward_clip(m, clip), clip, cfg, m.config().workspace).total;
  SequenceForward seq(m, clip);
  const double b = sequence_loss(seq.outputs(), clip, cfg, m.config().workspace, nullptr).total;
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(SequenceLossTest, IgnoresFramesBeyondPrefix) {
  const Model m = Model::initialize(toy_conv_config(), 8);
  const Clip a = random_clip(m.config().input_shape, 8, 9, 2);
  Clip b = a;
  for (int t = 4; t < 8; ++t) {
    b.frames[t].visual.setConstant(0.1f);
    b.frames[t].target_gt = Eigen::Vector3d(0.4, 0.4, 1.9);
  }
  const LossConfig cfg;
  SequenceForward sa(m, a, 4);
  SequenceForward sb(m, b, 4);
  EXPECT_EQ(sequence_loss(sa.outputs(), a, cfg, m.config().workspace, nullptr).total,
            sequence_loss(sb.outputs(), b, cfg, m.config().workspace, nullptr).total);
}

TEST(SequenceLossTest, AbsentHandHasNoHandGradient) {
  const Model m = Model::initialize(toy_conv_config(), 8);
  const Clip clip = random_clip(m.config().input_shape, 6, 9, 3);
  SequenceForward seq(m, clip);
  SequenceLossGradient g;
  sequence_loss(seq.outputs(), clip, LossConfig{}, m.config().workspace, &g);
  for (int t = 0; t < 3; ++t) EXPECT_TRUE(g.d_hand.col(t).isZero(0.0));
  EXPECT_FALSE(g.d_hand.col(4).isZero(0.0));
}

TEST(LossConfigTest, ValidateNamesField) {
  LossConfig cfg;
  cfg.weight_start = 0.5;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "weight_start");
  }
  cfg = LossConfig{};
  cfg.delta = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace egotarget
