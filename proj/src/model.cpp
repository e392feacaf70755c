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

#include "egotarget/model.hpp"

#include <cmath>
#include <random>

#include "egotarget/error.hpp"
#include "nn_ops.hpp"

namespace egotarget {

Eigen::VectorXd GridSpec::centers() const {
  Eigen::VectorXd g(bins);
  for (int i = 0; i < bins; ++i) {
    g[i] = -1.0 + (2.0 * i + 1.0) / bins;
  }
  return g;
}

void GridSpec::validate() const {
  if (bins < 2) throw ConfigError("grid.bins", "must be >= 2");
  if (!(threshold() >= 0.0)) throw ConfigError("grid.gamma", "must be >= 0");
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  if (encoder == VisualEncoderKind::kConv4) {
    need(input_shape.channels == 3, "input_shape", "conv encoder needs 3 channels");
    need(input_shape.height > 0 && input_shape.height == input_shape.width,
         "input_shape", "conv encoder needs a square image");
    for (int c : conv_channels) need(c > 0, "conv_channels", "must be positive");
  } else {
    need(input_shape.height == 1 && input_shape.width == 1 &&
             input_shape.channels > 0,
         "input_shape", "feature encoder needs shape 1 x 1 x D");
  }
  need(visual_dim > 0, "visual_dim", "must be positive");
  need(hand_hidden > 0, "hand_hidden", "must be positive");
  need(hand_dim > 0, "hand_dim", "must be positive");
  need(fused_dim > 0, "fused_dim", "must be positive");
  need(lstm_layers == 2, "lstm_layers", "the recurrent core has exactly 2 layers");
  need(lstm_hidden > 0, "lstm_hidden", "must be positive");
  need(head_hidden > 0, "head_hidden", "must be positive");
  need(aux_hidden > 0, "aux_hidden", "must be positive");
  grid.validate();
  try {
    workspace.validate();
  } catch (const DomainError& e) {
    throw ConfigError("workspace", e.what());
  }
}

int ModelConfig::conv_side(int block) const {
  int side = input_shape.height;
  for (int i = 0; i <= block; ++i) side = nn::conv_out_side(side);
  return side;
}

int ModelConfig::conv_input_channels() const {
  return input_shape.channels + (coord_channels ? 2 : 0);
}

int ModelConfig::visual_input_dim() const {
  if (encoder == VisualEncoderKind::kFeatures) return input_shape.size();
  const int side = conv_side(3);
  return conv_channels[3] * side * side;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams out = *this;
  out.for_each([](const std::string&, auto& t) { t.setZero(); });
  return out;
}

std::size_t ModelParams::num_scalars() const {
  std::size_t n = 0;
  for_each([&n](const std::string&, const auto& t) {
    n += static_cast<std::size_t>(t.size());
  });
  return n;
}

RecurrentState RecurrentState::zeros(const ModelConfig& cfg) {
  RecurrentState s;
  s.hidden.assign(static_cast<std::size_t>(cfg.lstm_layers),
                  Eigen::VectorXd::Zero(cfg.lstm_hidden));
  s.cell = s.hidden;
  return s;
}

namespace {

Linear zero_linear(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

}  // namespace

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  grid_centers_ = cfg_.grid.centers();
  ModelParams& p = params_;
  if (cfg_.encoder == VisualEncoderKind::kConv4) {
    int in = cfg_.conv_input_channels();
    for (int i = 0; i < 4; ++i) {
      p.conv[i] = zero_linear(cfg_.conv_channels[i], in * 9);
      in = cfg_.conv_channels[i];
    }
  }
  p.visual_fc = zero_linear(cfg_.visual_dim, cfg_.visual_input_dim());
  p.hand_fc1 = zero_linear(cfg_.hand_hidden, 2 * kNumLandmarks);
  p.hand_fc2 = zero_linear(cfg_.hand_dim, cfg_.hand_hidden);
  p.fuse = zero_linear(cfg_.fused_dim, cfg_.visual_dim + cfg_.hand_dim);
  const int h = cfg_.lstm_hidden;
  p.lstm.resize(static_cast<std::size_t>(cfg_.lstm_layers));
  for (int l = 0; l < cfg_.lstm_layers; ++l) {
    const int in = l == 0 ? cfg_.fused_dim : h;
    p.lstm[l] = {Eigen::MatrixXd::Zero(4 * h, in), Eigen::MatrixXd::Zero(4 * h, h),
                 Eigen::VectorXd::Zero(4 * h)};
  }
  for (int a = 0; a < 3; ++a) {
    p.axis_fc1[a] = zero_linear(cfg_.head_hidden, h);
    p.axis_fc2[a] = zero_linear(cfg_.grid.bins, cfg_.head_hidden);
  }
  p.time_fc1 = zero_linear(cfg_.aux_hidden, h);
  p.time_fc2 = zero_linear(1, cfg_.aux_hidden);
  p.hand_pos_fc1 = zero_linear(cfg_.aux_hidden, cfg_.visual_dim);
  p.hand_pos_fc2 = zero_linear(2, cfg_.aux_hidden);
}

Model Model::initialize(ModelConfig cfg, std::uint64_t seed) {
  Model model(std::move(cfg));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](auto& t, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = bound * u(rng);
  };
  auto fill_linear = [&](Linear& l) {
    fill(l.weight, static_cast<int>(l.weight.cols()));
    fill(l.bias, static_cast<int>(l.weight.cols()));
  };
  ModelParams& p = model.params_;
  for (auto& c : p.conv) {
    if (c.weight.size() > 0) fill_linear(c);
  }
  fill_linear(p.visual_fc);
  fill_linear(p.hand_fc1);
  fill_linear(p.hand_fc2);
  fill_linear(p.fuse);
  for (auto& layer : p.lstm) {
    const int h = static_cast<int>(layer.w_hidden.cols());
    fill(layer.w_input, h);
    fill(layer.w_hidden, h);
    fill(layer.bias, h);
  }
  for (int a = 0; a < 3; ++a) {
    fill_linear(p.axis_fc1[a]);
    fill_linear(p.axis_fc2[a]);
  }
  fill_linear(p.time_fc1);
  fill_linear(p.time_fc2);
  fill_linear(p.hand_pos_fc1);
  fill_linear(p.hand_pos_fc2);
  model.round_to_float();
  return model;
}

void Model::round_to_float() {
  params_.for_each([](const std::string&, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = static_cast<double>(static_cast<float>(t.data()[i]));
    }
  });
}

Eigen::VectorXd Model::encode_visual(const Eigen::VectorXf& visual) const {
  if (visual.size() != cfg_.input_shape.size()) {
    throw ShapeError("encode_visual: expected " +
                     std::to_string(cfg_.input_shape.size()) + " values, got " +
                     std::to_string(visual.size()));
  }
  Eigen::VectorXd flat;
  if (cfg_.encoder == VisualEncoderKind::kConv4) {
    int side = cfg_.input_shape.height;
    Eigen::MatrixXd x(cfg_.conv_input_channels(), side * side);
    nn::fill_image_planes(visual, cfg_.input_shape.channels, side, cfg_.coord_channels, x, 0);
    for (int i = 0; i < 4; ++i) {
      x = nn::affine(params_.conv[i], nn::im2col(x, side, 1));
      nn::relu_inplace(x);
      side = nn::conv_out_side(side);
    }
    flat = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  } else {
    flat = visual.cast<double>();
  }
  Eigen::VectorXd v = nn::affine(params_.visual_fc, flat);
  nn::relu_inplace(v);
  return v;
}

Eigen::VectorXd Model::encode_hand(const HandLandmarks& landmarks,
                                   const CameraIntrinsics& k) const {
  Eigen::VectorXd h1 = nn::affine(params_.hand_fc1, nn::landmark_input(landmarks, k));
  nn::relu_inplace(h1);
  return nn::affine(params_.hand_fc2, h1);
}

Eigen::VectorXd Model::fuse(const Eigen::VectorXd& visual,
                            const Eigen::VectorXd& hand) const {
  if (visual.size() != cfg_.visual_dim || hand.size() != cfg_.hand_dim) {
    throw ShapeError("fuse: expected dims (" + std::to_string(cfg_.visual_dim) +
                     ", " + std::to_string(cfg_.hand_dim) + ")");
  }
  Eigen::VectorXd cat(visual.size() + hand.size());
  cat << visual, hand;
  Eigen::VectorXd u = nn::affine(params_.fuse, cat);
  nn::relu_inplace(u);
  return u;
}

std::pair<Eigen::VectorXd, RecurrentState> Model::step(
    const Eigen::VectorXd& fused, const RecurrentState& state) const {
  const int h = cfg_.lstm_hidden;
  if (fused.size() != cfg_.fused_dim ||
      static_cast<int>(state.hidden.size()) != cfg_.lstm_layers ||
      static_cast<int>(state.cell.size()) != cfg_.lstm_layers) {
    throw ShapeError("step: input or state does not match the config");
  }
  RecurrentState next = state;
  Eigen::VectorXd x = fused;
  for (int l = 0; l < cfg_.lstm_layers; ++l) {
    if (state.hidden[l].size() != h || state.cell[l].size() != h) {
      throw ShapeError("step: state layer size mismatch");
    }
    const LstmLayer& p = params_.lstm[l];
    const Eigen::VectorXd z = p.w_input * x + p.w_hidden * state.hidden[l] + p.bias;
    Eigen::VectorXd c(h);
    Eigen::VectorXd out(h);
    for (int j = 0; j < h; ++j) {
      const double ig = nn::sigmoid(z[j]);
      const double fg = nn::sigmoid(z[h + j]);
      const double gg = std::tanh(z[2 * h + j]);
      const double og = nn::sigmoid(z[3 * h + j]);
      c[j] = fg * state.cell[l][j] + ig * gg;
      out[j] = og * std::tanh(c[j]);
    }
    next.cell[l] = c;
    next.hidden[l] = out;
    x = out;
  }
  return {x, next};
}

std::array<Eigen::VectorXd, 3> Model::score_heads(const Eigen::VectorXd& core) const {
  if (core.size() != cfg_.lstm_hidden) throw ShapeError("score_heads: bad input size");
  std::array<Eigen::VectorXd, 3> out;
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd hidden = nn::affine(params_.axis_fc1[a], core);
    nn::relu_inplace(hidden);
    out[a] = nn::softmax(nn::affine(params_.axis_fc2[a], hidden));
  }
  return out;
}

Eigen::Vector2d Model::hand_head(const Eigen::VectorXd& visual) const {
  Eigen::VectorXd hidden = nn::affine(params_.hand_pos_fc1, visual);
  nn::relu_inplace(hidden);
  return nn::affine(params_.hand_pos_fc2, hidden);
}

double Model::time_head(const Eigen::VectorXd& core) const {
  Eigen::VectorXd hidden = nn::affine(params_.time_fc1, core);
  nn::relu_inplace(hidden);
  return nn::sigmoid(nn::affine(params_.time_fc2, hidden)[0]);
}

FrameOutput Model::infer_frame(const Frame& frame, const CameraIntrinsics& k,
                               RecurrentState& state) const {
  const Eigen::VectorXd v = encode_visual(frame.visual);
  const Eigen::VectorXd h = cfg_.use_hand_features
                                ? encode_hand(frame.landmarks, k)
                                : Eigen::VectorXd::Zero(cfg_.hand_dim);
  auto [core, next] = step(fuse(v, h), state);
  state = std::move(next);
  FrameOutput out;
  out.scores = score_heads(core);
  const double gamma = cfg_.grid.threshold();
  for (int a = 0; a < 3; ++a) {
    out.raw_point[a] = decode(out.scores[a], grid_centers_, gamma);
  }
  const Eigen::Vector2d hand = hand_head(v);
  out.hand_pred = Eigen::Vector2d(hand.x() * k.width, hand.y() * k.height);
  out.time_pred = time_head(core);
  return out;
}

double decode(const Eigen::VectorXd& scores, const Eigen::VectorXd& centers,
              double gamma) {
  if (scores.size() != centers.size()) {
    throw ShapeError("decode: scores and grid differ in length");
  }
  double mass = 0.0;
  double moment = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (scores[i] > gamma) {
      mass += scores[i];
      moment += scores[i] * centers[i];
    }
  }
  if (mass <= 0.0) {
    mass = scores.sum();
    moment = scores.dot(centers);
  }
  return mass > 0.0 ? moment / mass : 0.0;
}

double decode(const Eigen::VectorXd& scores, const GridSpec& grid) {
  return decode(scores, grid.centers(), grid.threshold());
}

std::vector<FrameOutput> forward_clip(const Model& model, const Clip& clip) {
  RecurrentState state = RecurrentState::zeros(model.config());
  std::vector<FrameOutput> out;
  out.reserve(clip.frames.size());
  for (const auto& frame : clip.frames) {
    out.push_back(model.infer_frame(frame, clip.intrinsics, state));
  }
  return out;
}

}  // namespace egotarget
