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

// Dense building blocks shared by the per-frame and whole-sequence paths.
// Feature maps are (channels x pixels) matrices; N frames are laid side by
// side, so frame n occupies columns [n * side^2, (n + 1) * side^2).

#pragma once

#include <cmath>

#include <Eigen/Core>

#include "egotarget/model.hpp"

namespace egotarget::nn {

inline int conv_out_side(int side) { return (side + 1) / 2; }

// Writes one frame (channels x side^2, channel fastest in memory) into
// x.middleCols(col, side^2), mapping [0, 1] intensities to [-2, 2], followed by
// x and y coordinate planes in [-1, 1] when `coords` is set.
inline void fill_image_planes(const Eigen::VectorXf& visual, int channels, int side,
                              bool coords, Eigen::MatrixXd& x, Eigen::Index col) {
  const int px = side * side;
  x.block(0, col, channels, px) =
      ((Eigen::Map<const Eigen::MatrixXf>(visual.data(), channels, px).cast<double>()).array() -
       0.5) * 4.0;
  if (!coords) return;
  for (int y = 0; y < side; ++y) {
    for (int xx = 0; xx < side; ++xx) {
      x(channels, col + y * side + xx) = -1.0 + (2.0 * xx + 1.0) / side;
      x(channels + 1, col + y * side + xx) = -1.0 + (2.0 * y + 1.0) / side;
    }
  }
}

// 3x3 kernel, stride 2, zero padding 1. Row index c * 9 + ky * 3 + kx.
inline Eigen::MatrixXd im2col(const Eigen::MatrixXd& input, int side,
                              int frames) {
  const int channels = static_cast<int>(input.rows());
  const int out = conv_out_side(side);
  const int in_px = side * side;
  const int out_px = out * out;
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(channels * 9, frames * out_px);
  for (int n = 0; n < frames; ++n) {
    for (int oy = 0; oy < out; ++oy) {
      for (int ox = 0; ox < out; ++ox) {
        const int col = n * out_px + oy * out + ox;
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = 2 * oy - 1 + ky;
          if (iy < 0 || iy >= side) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = 2 * ox - 1 + kx;
            if (ix < 0 || ix >= side) continue;
            const int src = n * in_px + iy * side + ix;
            for (int c = 0; c < channels; ++c) {
              cols(c * 9 + ky * 3 + kx, col) = input(c, src);
            }
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col.
inline Eigen::MatrixXd col2im(const Eigen::MatrixXd& cols, int channels,
                              int side, int frames) {
  const int out = conv_out_side(side);
  const int in_px = side * side;
  const int out_px = out * out;
  Eigen::MatrixXd input = Eigen::MatrixXd::Zero(channels, frames * in_px);
  for (int n = 0; n < frames; ++n) {
    for (int oy = 0; oy < out; ++oy) {
      for (int ox = 0; ox < out; ++ox) {
        const int col = n * out_px + oy * out + ox;
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = 2 * oy - 1 + ky;
          if (iy < 0 || iy >= side) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = 2 * ox - 1 + kx;
            if (ix < 0 || ix >= side) continue;
            const int dst = n * in_px + iy * side + ix;
            for (int c = 0; c < channels; ++c) {
              input(c, dst) += cols(c * 9 + ky * 3 + kx, col);
            }
          }
        }
      }
    }
  }
  return input;
}

// Landmarks as normalized camera rays ((u - cx) / fx, (v - cy) / fy); an
// absent hand stays all-zero.
inline Eigen::VectorXd landmark_input(const HandLandmarks& landmarks,
                                      const CameraIntrinsics& k) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * kNumLandmarks);
  if (!landmarks.present) return x;
  for (int i = 0; i < kNumLandmarks; ++i) {
    x[2 * i] = (landmarks.points[i].x() - k.cx) / k.fx;
    x[2 * i + 1] = (landmarks.points[i].y() - k.cy) / k.fy;
  }
  return x;
}

inline Eigen::MatrixXd affine(const Linear& l, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = l.weight * x;
  y.colwise() += l.bias;
  return y;
}

inline Eigen::VectorXd affine(const Linear& l, const Eigen::VectorXd& x) {
  return l.weight * x + l.bias;
}

inline void relu_inplace(Eigen::MatrixXd& x) { x = x.cwiseMax(0.0); }
inline void relu_inplace(Eigen::VectorXd& x) { x = x.cwiseMax(0.0); }

// Zeroes gradient entries where the post-activation value is not positive.
inline void relu_backward(Eigen::MatrixXd& grad, const Eigen::MatrixXd& out) {
  grad = (out.array() > 0.0).select(grad, 0.0);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

// Accumulates weight/bias gradients of y = W x + b.
inline void accumulate_linear(Linear& grad, const Eigen::MatrixXd& d_out,
                              const Eigen::MatrixXd& input) {
  grad.weight.noalias() += d_out * input.transpose();
  grad.bias.noalias() += d_out.rowwise().sum();
}

}  // namespace egotarget::nn
