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

// Whole-sequence forward pass with cached activations and the matching
// backward pass (backpropagation through time for the LSTM).

#include <cmath>

#include "egotarget/error.hpp"
#include "egotarget/model.hpp"
#include "nn_ops.hpp"

namespace egotarget {

struct LstmCache {
  Eigen::MatrixXd input;  // in x T
  Eigen::MatrixXd i, f, g, o;  // H x T gate activations
  Eigen::MatrixXd c;      // H x T cell states
  Eigen::MatrixXd tanh_c;
  Eigen::MatrixXd h;      // H x T outputs
};

struct SequenceCache {
  int length = 0;
  std::array<Eigen::MatrixXd, 4> conv_cols;  // im2col of each block's input
  std::array<Eigen::MatrixXd, 4> conv_out;   // post-ReLU block outputs
  Eigen::MatrixXd visual_in;                 // visual_fc input, D x T
  Eigen::MatrixXd visual;                    // v_t, post-ReLU
  Eigen::MatrixXd landmarks;                 // 42 x T
  Eigen::MatrixXd hand_hidden;
  Eigen::MatrixXd fuse_in;                   // (visual + hand) x T
  Eigen::MatrixXd fused;                     // u_t, post-ReLU
  std::vector<LstmCache> lstm;
  std::array<Eigen::MatrixXd, 3> axis_hidden;
  std::array<Eigen::MatrixXd, 3> axis_mask;  // 1 where a bin is kept
  std::array<Eigen::RowVectorXd, 3> axis_mass;
  Eigen::MatrixXd time_hidden;
  Eigen::MatrixXd hand_pos_hidden;
};

SequenceForward::SequenceForward(SequenceForward&&) noexcept = default;
SequenceForward& SequenceForward::operator=(SequenceForward&&) noexcept = default;
SequenceForward::~SequenceForward() = default;

int SequenceForward::length() const { return cache_->length; }

SequenceForward::SequenceForward(const Model& model, const Clip& clip, int length)
    : model_(&model), cache_(std::make_unique<SequenceCache>()) {
  const ModelConfig& cfg = model.config();
  const ModelParams& p = model.params();
  const int t_len = length < 0 ? clip.length() : length;
  if (t_len < 1 || t_len > clip.length()) {
    throw ShapeError("SequenceForward: invalid prefix length");
  }
  SequenceCache& c = *cache_;
  c.length = t_len;
  const int in_size = cfg.input_shape.size();

  // Visual encoder over all frames at once.
  if (cfg.encoder == VisualEncoderKind::kConv4) {
    int side = cfg.input_shape.height;
    Eigen::MatrixXd x(cfg.conv_input_channels(), static_cast<Eigen::Index>(t_len) * side * side);
    for (int t = 0; t < t_len; ++t) {
      const Eigen::VectorXf& vis = clip.frames[t].visual;
      if (vis.size() != in_size) throw ShapeError("SequenceForward: visual size mismatch");
      nn::fill_image_planes(vis, cfg.input_shape.channels, side, cfg.coord_channels, x,
                            static_cast<Eigen::Index>(t) * side * side);
    }
    for (int b = 0; b < 4; ++b) {
      c.conv_cols[b] = nn::im2col(x, side, t_len);
      x = nn::affine(p.conv[b], c.conv_cols[b]);
      nn::relu_inplace(x);
      c.conv_out[b] = x;
      side = nn::conv_out_side(side);
    }
    c.visual_in = Eigen::Map<const Eigen::MatrixXd>(
        c.conv_out[3].data(), c.conv_out[3].size() / t_len, t_len);
  } else {
    c.visual_in.resize(in_size, t_len);
    for (int t = 0; t < t_len; ++t) {
      const Eigen::VectorXf& vis = clip.frames[t].visual;
      if (vis.size() != in_size) throw ShapeError("SequenceForward: visual size mismatch");
      c.visual_in.col(t) = vis.cast<double>();
    }
  }
  c.visual = nn::affine(p.visual_fc, c.visual_in);
  nn::relu_inplace(c.visual);

  // Hand encoder.
  Eigen::MatrixXd hand = Eigen::MatrixXd::Zero(cfg.hand_dim, t_len);
  if (cfg.use_hand_features) {
    c.landmarks.resize(2 * kNumLandmarks, t_len);
    for (int t = 0; t < t_len; ++t) {
      c.landmarks.col(t) = nn::landmark_input(clip.frames[t].landmarks, clip.intrinsics);
    }
    c.hand_hidden = nn::affine(p.hand_fc1, c.landmarks);
    nn::relu_inplace(c.hand_hidden);
    hand = nn::affine(p.hand_fc2, c.hand_hidden);
  }

  c.fuse_in.resize(cfg.visual_dim + cfg.hand_dim, t_len);
  c.fuse_in.topRows(cfg.visual_dim) = c.visual;
  c.fuse_in.bottomRows(cfg.hand_dim) = hand;
  c.fused = nn::affine(p.fuse, c.fuse_in);
  nn::relu_inplace(c.fused);

  // LSTM, layer by layer.
  const int h = cfg.lstm_hidden;
  c.lstm.resize(static_cast<std::size_t>(cfg.lstm_layers));
  const Eigen::MatrixXd* layer_in = &c.fused;
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const LstmLayer& lp = p.lstm[l];
    LstmCache& lc = c.lstm[l];
    lc.input = *layer_in;
    Eigen::MatrixXd zx = lp.w_input * lc.input;
    zx.colwise() += lp.bias;
    lc.i.resize(h, t_len);
    lc.f.resize(h, t_len);
    lc.g.resize(h, t_len);
    lc.o.resize(h, t_len);
    lc.c.resize(h, t_len);
    lc.tanh_c.resize(h, t_len);
    lc.h.resize(h, t_len);
    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
    for (int t = 0; t < t_len; ++t) {
      const Eigen::VectorXd z = zx.col(t) + lp.w_hidden * h_prev;
      for (int j = 0; j < h; ++j) {
        lc.i(j, t) = nn::sigmoid(z[j]);
        lc.f(j, t) = nn::sigmoid(z[h + j]);
        lc.g(j, t) = std::tanh(z[2 * h + j]);
        lc.o(j, t) = nn::sigmoid(z[3 * h + j]);
        lc.c(j, t) = lc.f(j, t) * c_prev[j] + lc.i(j, t) * lc.g(j, t);
        lc.tanh_c(j, t) = std::tanh(lc.c(j, t));
        lc.h(j, t) = lc.o(j, t) * lc.tanh_c(j, t);
      }
      h_prev = lc.h.col(t);
      c_prev = lc.c.col(t);
    }
    layer_in = &lc.h;
  }
  const Eigen::MatrixXd& core = c.lstm.back().h;

  // Grid heads and masked decode.
  const Eigen::VectorXd& centers = model.grid_centers();
  const double gamma = cfg.grid.threshold();
  outputs_.raw_points.resize(3, t_len);
  for (int a = 0; a < 3; ++a) {
    c.axis_hidden[a] = nn::affine(p.axis_fc1[a], core);
    nn::relu_inplace(c.axis_hidden[a]);
    Eigen::MatrixXd logits = nn::affine(p.axis_fc2[a], c.axis_hidden[a]);
    Eigen::MatrixXd& probs = outputs_.scores[a];
    probs.resize(logits.rows(), t_len);
    c.axis_mask[a].resize(logits.rows(), t_len);
    c.axis_mass[a].resize(t_len);
    for (int t = 0; t < t_len; ++t) {
      probs.col(t) = nn::softmax(logits.col(t));
      auto mask = c.axis_mask[a].col(t);
      mask = (probs.col(t).array() > gamma).cast<double>();
      double mass = probs.col(t).dot(mask);
      if (mass <= 0.0) {
        mask.setOnes();
        mass = probs.col(t).sum();
      }
      c.axis_mass[a][t] = mass;
      outputs_.raw_points(a, t) =
          probs.col(t).cwiseProduct(mask).dot(centers) / mass;
    }
  }

  c.time_hidden = nn::affine(p.time_fc1, core);
  nn::relu_inplace(c.time_hidden);
  const Eigen::MatrixXd time_logit = nn::affine(p.time_fc2, c.time_hidden);
  outputs_.time_pred = time_logit.row(0).unaryExpr([](double v) { return nn::sigmoid(v); });

  c.hand_pos_hidden = nn::affine(p.hand_pos_fc1, c.visual);
  nn::relu_inplace(c.hand_pos_hidden);
  outputs_.hand_norm = nn::affine(p.hand_pos_fc2, c.hand_pos_hidden);
}

void SequenceForward::backward(const Eigen::Matrix3Xd& d_points,
                               const Eigen::Matrix2Xd& d_hand,
                               const Eigen::RowVectorXd& d_time,
                               ModelParams& grads) const {
  const Model& model = *model_;
  const ModelConfig& cfg = model.config();
  const ModelParams& p = model.params();
  const SequenceCache& c = *cache_;
  const int t_len = c.length;
  if (d_points.cols() != t_len || d_hand.cols() != t_len || d_time.size() != t_len) {
    throw ShapeError("SequenceForward::backward: gradient length mismatch");
  }
  const Eigen::MatrixXd& core = c.lstm.back().h;
  Eigen::MatrixXd d_core = Eigen::MatrixXd::Zero(core.rows(), t_len);

  // Time head.
  {
    Eigen::MatrixXd d_logit(1, t_len);
    for (int t = 0; t < t_len; ++t) {
      const double y = outputs_.time_pred[t];
      d_logit(0, t) = d_time[t] * y * (1.0 - y);
    }
    nn::accumulate_linear(grads.time_fc2, d_logit, c.time_hidden);
    Eigen::MatrixXd d_hidden = p.time_fc2.weight.transpose() * d_logit;
    nn::relu_backward(d_hidden, c.time_hidden);
    nn::accumulate_linear(grads.time_fc1, d_hidden, core);
    d_core.noalias() += p.time_fc1.weight.transpose() * d_hidden;
  }

  // Grid heads through the masked, renormalized expectation and softmax.
  const Eigen::VectorXd& centers = model.grid_centers();
  for (int a = 0; a < 3; ++a) {
    const Eigen::MatrixXd& probs = outputs_.scores[a];
    Eigen::MatrixXd d_logit(probs.rows(), t_len);
    for (int t = 0; t < t_len; ++t) {
      const double x = outputs_.raw_points(a, t);
      const Eigen::VectorXd d_prob = c.axis_mask[a].col(t).cwiseProduct(
          ((centers.array() - x) * (d_points(a, t) / c.axis_mass[a][t])).matrix());
      const double inner = probs.col(t).dot(d_prob);
      d_logit.col(t) = probs.col(t).cwiseProduct(
          (d_prob.array() - inner).matrix());
    }
    nn::accumulate_linear(grads.axis_fc2[a], d_logit, c.axis_hidden[a]);
    Eigen::MatrixXd d_hidden = p.axis_fc2[a].weight.transpose() * d_logit;
    nn::relu_backward(d_hidden, c.axis_hidden[a]);
    nn::accumulate_linear(grads.axis_fc1[a], d_hidden, core);
    d_core.noalias() += p.axis_fc1[a].weight.transpose() * d_hidden;
  }

  // LSTM backpropagation through time, top layer first.
  const int h = cfg.lstm_hidden;
  Eigen::MatrixXd d_out = std::move(d_core);
  for (int l = cfg.lstm_layers - 1; l >= 0; --l) {
    const LstmLayer& lp = p.lstm[l];
    const LstmCache& lc = c.lstm[l];
    Eigen::MatrixXd d_z(4 * h, t_len);
    Eigen::VectorXd d_h_next = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd d_c_next = Eigen::VectorXd::Zero(h);
    for (int t = t_len - 1; t >= 0; --t) {
      for (int j = 0; j < h; ++j) {
        const double dh = d_out(j, t) + d_h_next[j];
        const double o = lc.o(j, t);
        const double tc = lc.tanh_c(j, t);
        const double dc = d_c_next[j] + dh * o * (1.0 - tc * tc);
        const double c_prev = t > 0 ? lc.c(j, t - 1) : 0.0;
        const double i = lc.i(j, t);
        const double f = lc.f(j, t);
        const double g = lc.g(j, t);
        d_z(j, t) = dc * g * i * (1.0 - i);
        d_z(h + j, t) = dc * c_prev * f * (1.0 - f);
        d_z(2 * h + j, t) = dc * i * (1.0 - g * g);
        d_z(3 * h + j, t) = dh * tc * o * (1.0 - o);
        d_c_next[j] = dc * f;
      }
      d_h_next.noalias() = lp.w_hidden.transpose() * d_z.col(t);
    }
    LstmLayer& gl = grads.lstm[l];
    gl.w_input.noalias() += d_z * lc.input.transpose();
    gl.bias.noalias() += d_z.rowwise().sum();
    if (t_len > 1) {
      gl.w_hidden.noalias() +=
          d_z.rightCols(t_len - 1) * lc.h.leftCols(t_len - 1).transpose();
    }
    d_out = lp.w_input.transpose() * d_z;
  }

  // Fusion MLP.
  Eigen::MatrixXd d_fused = std::move(d_out);
  nn::relu_backward(d_fused, c.fused);
  nn::accumulate_linear(grads.fuse, d_fused, c.fuse_in);
  const Eigen::MatrixXd d_fuse_in = p.fuse.weight.transpose() * d_fused;
  Eigen::MatrixXd d_visual = d_fuse_in.topRows(cfg.visual_dim);

  if (cfg.use_hand_features) {
    const Eigen::MatrixXd d_hand_feat = d_fuse_in.bottomRows(cfg.hand_dim);
    nn::accumulate_linear(grads.hand_fc2, d_hand_feat, c.hand_hidden);
    Eigen::MatrixXd d_hidden = p.hand_fc2.weight.transpose() * d_hand_feat;
    nn::relu_backward(d_hidden, c.hand_hidden);
    nn::accumulate_linear(grads.hand_fc1, d_hidden, c.landmarks);
  }

  // Fingertip-position head reads v_t.
  {
    const Eigen::MatrixXd d_pos = d_hand;
    nn::accumulate_linear(grads.hand_pos_fc2, d_pos, c.hand_pos_hidden);
    Eigen::MatrixXd d_hidden = p.hand_pos_fc2.weight.transpose() * d_pos;
    nn::relu_backward(d_hidden, c.hand_pos_hidden);
    nn::accumulate_linear(grads.hand_pos_fc1, d_hidden, c.visual);
    d_visual.noalias() += p.hand_pos_fc1.weight.transpose() * d_hidden;
  }

  // Visual encoder.
  nn::relu_backward(d_visual, c.visual);
  nn::accumulate_linear(grads.visual_fc, d_visual, c.visual_in);
  if (cfg.encoder != VisualEncoderKind::kConv4) return;
  const Eigen::MatrixXd d_flat = p.visual_fc.weight.transpose() * d_visual;
  Eigen::MatrixXd d_map = Eigen::Map<const Eigen::MatrixXd>(
      d_flat.data(), c.conv_out[3].rows(), c.conv_out[3].cols());
  for (int b = 3; b >= 0; --b) {
    nn::relu_backward(d_map, c.conv_out[b]);
    nn::accumulate_linear(grads.conv[b], d_map, c.conv_cols[b]);
    if (b == 0) break;
    const Eigen::MatrixXd d_cols = p.conv[b].weight.transpose() * d_map;
    d_map = nn::col2im(d_cols, static_cast<int>(c.conv_out[b - 1].rows()),
                       cfg.conv_side(b - 1), t_len);
  }
}

}  // namespace egotarget
