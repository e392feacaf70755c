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
#include <random>

#include <gtest/gtest.h>

#include "egotarget/error.hpp"
#include "egotarget/losses.hpp"
#include "egotarget/model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace egotarget {
namespace {

using testing::random_clip;
using testing::toy_conv_config;
using testing::toy_feature_config;

TEST(GridTest, CentersAreCellMidpoints) {
  GridSpec g;
  g.bins = 8;
  const Eigen::VectorXd c = g.centers();
  ASSERT_EQ(c.size(), 8);
  EXPECT_DOUBLE_EQ(c[0], -0.875);
  EXPECT_DOUBLE_EQ(c[7], 0.875);
  EXPECT_DOUBLE_EQ(g.threshold(), 0.125);
}

TEST(DecodeTest, HandComputedMask) {
  GridSpec g;
  g.bins = 8;
  Eigen::VectorXd s(8);
  s << 0.5, 0.3, 0.1, 0.05, 0.05, 0.0, 0.0, 0.0;
  // Bins 0 and 1 survive: (0.5 * -0.875 + 0.3 * -0.625) / 0.8.
  EXPECT_NEAR(decode(s, g), -0.78125, 1e-15);
}

TEST(DecodeTest, ExplicitGammaKeepsThreeBins) {
  GridSpec g;
  g.bins = 8;
  g.gamma = 0.08;
  Eigen::VectorXd s(8);
  s << 0.4, 0.3, 0.1, 0.05, 0.05, 0.05, 0.03, 0.02;
  // Renormalized (0.5, 0.375, 0.125) against (-0.875, -0.625, -0.375).
  EXPECT_NEAR(decode(s, g), -0.71875, 1e-15);
}

TEST(DecodeTest, UniformScoresFallBackToExpectation) {
  GridSpec g;
  g.bins = 8;
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(8, 0.125);
  EXPECT_NEAR(decode(s, g), 0.0, 1e-15);
}

TEST(DecodeTest, OneHotReturnsCenter) {
  GridSpec g;
  g.bins = 16;
  for (int i = 0; i < 16; ++i) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(16);
    s[i] = 1.0;
    EXPECT_NEAR(decode(s, g), -1.0 + (2.0 * i + 1.0) / 16.0, 1e-15);
  }
}

TEST(DecodeTest, MatchesBruteForceOnRandomSoftmax) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int bins : {4, 8, 64, 1024}) {
    GridSpec g;
    g.bins = bins;
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd s(bins);
      for (int i = 0; i < bins; ++i) s[i] = std::exp(n(rng));
      s /= s.sum();
      EXPECT_NEAR(decode(s, g), testing::brute_force_decode(s, bins, g.threshold()), 1e-12);
    }
  }
}

TEST(DecodeTest, WrongLengthThrows) {
  GridSpec g;
  g.bins = 8;
  EXPECT_THROW(decode(Eigen::VectorXd::Constant(7, 1.0 / 7), g), ShapeError);
}

TEST(ModelConfigTest, InvalidFieldsNamed) {
  ModelConfig cfg = toy_conv_config();
  cfg.lstm_hidden = 0;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "lstm_hidden");
  }
  cfg = toy_conv_config();
  cfg.grid.bins = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ModelTest, InitializationIsDeterministic) {
  const Model a = Model::initialize(toy_conv_config(), 7);
  const Model b = Model::initialize(toy_conv_config(), 7);
  const Model c = Model::initialize(toy_conv_config(), 8);
  std::vector<double> va, vb, vc;
  a.params().for_each([&](const std::string&, const auto& t) {
    va.insert(va.end(), t.data(), t.data() + t.size());
  });
  b.params().for_each([&](const std::string&, const auto& t) {
    vb.insert(vb.end(), t.data(), t.data() + t.size());
  });
  c.params().for_each([&](const std::string&, const auto& t) {
    vc.insert(vc.end(), t.data(), t.data() + t.size());
  });
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  for (double v : va) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}

TEST(ModelTest, OutputShapesAndRanges) {
  const Model m = Model::initialize(toy_conv_config(), 1);
  const Clip clip = random_clip(m.config().input_shape, 6, 2);
  const auto out = forward_clip(m, clip);
  ASSERT_EQ(out.size(), 6u);
  for (const FrameOutput& o : out) {
    for (const auto& s : o.scores) {
      ASSERT_EQ(s.size(), 8);
      EXPECT_NEAR(s.sum(), 1.0, 1e-12);
      EXPECT_GE(s.minCoeff(), 0.0);
    }
    EXPECT_LE(o.raw_point.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_GE(o.time_pred, 0.0);
    EXPECT_LE(o.time_pred, 1.0);
  }
}

TEST(ModelTest, WrongVisualSizeThrows) {
  const Model m = Model::initialize(toy_conv_config(), 1);
  Clip clip = random_clip(m.config().input_shape, 3, 2);
  clip.frames[1].visual.resize(10);
  EXPECT_THROW(forward_clip(m, clip), ShapeError);
  EXPECT_THROW(m.encode_visual(Eigen::VectorXf::Zero(5)), ShapeError);
}

TEST(ModelTest, CausalInFrames) {
  const Model m = Model::initialize(toy_conv_config(), 3);
  const Clip a = random_clip(m.config().input_shape, 8, 4);
  Clip b = a;
  b.frames[5].visual.setConstant(0.9f);
  b.frames[6].landmarks.points[kIndexFingertip] += Eigen::Vector2d(300.0, -200.0);
  const auto oa = forward_clip(m, a);
  const auto ob = forward_clip(m, b);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(oa[t].raw_point, ob[t].raw_point);
  EXPECT_NE(oa[5].raw_point, ob[5].raw_point);
}

TEST(ModelTest, HandAblationIgnoresLandmarks) {
  ModelConfig cfg = toy_conv_config();
  cfg.use_hand_features = false;
  const Model m = Model::initialize(cfg, 3);
  const Clip a = random_clip(cfg.input_shape, 5, 4);
  Clip b = a;
  for (Frame& f : b.frames) f.landmarks.points[0] += Eigen::Vector2d(50.0, 50.0);
  const auto oa = forward_clip(m, a);
  const auto ob = forward_clip(m, b);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(oa[t].raw_point, ob[t].raw_point);
}

TEST(ModelTest, FeatureEncoderRuns) {
  const Model m = Model::initialize(toy_feature_config(), 9);
  const Clip clip = random_clip(m.config().input_shape, 4, 1);
  const auto out = forward_clip(m, clip);
  EXPECT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].scores[2].size(), 16);
}

TEST(SequenceForwardTest, MatchesPerFrameInference) {
  for (const ModelConfig& cfg : {toy_conv_config(), toy_feature_config()}) {
    const Model m = Model::initialize(cfg, 12);
    const Clip clip = random_clip(cfg.input_shape, 9, 13, 3);
    const auto ref = forward_clip(m, clip);
    SequenceForward seq(m, clip);
    const SequenceOutputs& o = seq.outputs();
    ASSERT_EQ(o.raw_points.cols(), 9);
    for (int t = 0; t < 9; ++t) {
      EXPECT_LT((o.raw_points.col(t) - ref[t].raw_point).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_NEAR(o.time_pred[t], ref[t].time_pred, 1e-6);
      for (int a = 0; a < 3; ++a) {
        EXPECT_LT((o.scores[a].col(t) - ref[t].scores[a]).cwiseAbs().maxCoeff(), 1e-6);
      }
    }
  }
}

TEST(SequenceForwardTest, PrefixLength) {
  const Model m = Model::initialize(toy_conv_config(), 12);
  const Clip clip = random_clip(m.config().input_shape, 9, 13);
  SequenceForward seq(m, clip, 4);
  EXPECT_EQ(seq.length(), 4);
  EXPECT_EQ(seq.outputs().raw_points.cols(), 4);
}

// Masking is piecewise constant in the scores; with gamma inside a score gap
// (or below every score) the objective is smooth around the evaluation point.
TEST(GradientTest, ConvModelUnmasked) {
  const Model base = Model::initialize(toy_conv_config(), 21);
  const Model m = testing::with_gamma(base, 0.0);
  const Clip clip = random_clip(m.config().input_shape, 5, 22, 2);
  const auto r = testing::check_gradients(m, clip, LossConfig{});
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
  EXPECT_EQ(static_cast<std::size_t>(r.checked), m.params().num_scalars());
}

TEST(GradientTest, ConvModelMaskActive) {
  const Model base = Model::initialize(toy_conv_config(), 31);
  const Clip clip = random_clip(base.config().input_shape, 4, 32, 1);
  const Model m = testing::with_gamma(base, testing::gap_gamma(base, clip));
  const auto r = testing::check_gradients(m, clip, LossConfig{});
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(GradientTest, ClampActive) {
  const Model m = testing::with_gamma(Model::initialize(toy_feature_config(8), 41), 0.0);
  Clip clip = random_clip(m.config().input_shape, 4, 42, 1);
  // Far outside the workspace so the per-axis squared error exceeds the cap.
  clip.frames[1].target_gt = Eigen::Vector3d(2.5, 0.0, 1.0);
  clip.frames[3].target_gt = Eigen::Vector3d(0.1, -2.0, 4.0);
  const auto r = testing::check_gradients(m, clip, LossConfig{});
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(GradientTest, FeatureModelWithoutAuxiliaryLosses) {
  const Model m = testing::with_gamma(Model::initialize(toy_feature_config(), 51), 0.0);
  const Clip clip = random_clip(m.config().input_shape, 5, 52, 5);
  LossConfig cfg;
  cfg.use_time_loss = false;
  const auto r = testing::check_gradients(m, clip, cfg);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

}  // namespace
}  // namespace egotarget
