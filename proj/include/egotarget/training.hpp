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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "egotarget/data.hpp"
#include "egotarget/losses.hpp"
#include "egotarget/model.hpp"

namespace egotarget {

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;  // L2 term added to the gradient
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 32;
  int epochs = 50;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int clip_cap = kTrainClipCap;
  // Early stopping on validation error; 0 disables it.
  int patience = 0;
  LossConfig loss;
  ModelConfig model;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Clips grouped into a batch, padded to the longest member. mask(b, t) is 1
/// for real frames and 0 for padding.
struct Batch {
  std::vector<const Clip*> clips;
  std::vector<int> lengths;
  int max_length = 0;
  Eigen::MatrixXd mask;  // B x max_length
};

/// Consecutive groups of `batch_size` clips in the given order.
std::vector<Batch> pad_and_batch(const std::vector<const Clip*>& clips,
                                 int batch_size);

struct BatchLoss {
  double total = 0.0;
  // Weighted per-frame objective w_t (L^p + delta (L^Hand + L^Time)); zero on
  // padded frames.
  Eigen::MatrixXd per_frame;  // B x max_length
  double position = 0.0;
  double hand = 0.0;
  double time = 0.0;
};

/// Sum of per-clip objectives over the batch. When `grads` is non-null the
/// gradient of `total` is accumulated into it.
BatchLoss batch_loss(const Model& model, const Batch& batch, const LossConfig& cfg,
                     ModelParams* grads);

/// Adam with coupled L2 weight decay. Parameters are rounded to float32
/// after every update so checkpoints store them exactly.
class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParams& like, double lr, double weight_decay,
                double beta1, double beta2, double eps);
  void step(Model& model, const ModelParams& grads);
  int steps() const { return steps_; }

 private:
  double lr_, wd_, beta1_, beta2_, eps_;
  int steps_ = 0;
  ModelParams m_;
  ModelParams v_;
};

struct LogRow {
  int epoch = 0;
  std::string split;  // "train" or "val"
  double total = 0.0;  // per-clip means
  double position = 0.0;
  double hand = 0.0;
  double time = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  Model checkpoint;  // best validation error (final model without val clips)
  int best_epoch = 0;
  double best_val_error_cm = 0.0;
  std::vector<LogRow> log;
};

using ProgressFn = std::function<void(std::uint64_t seed, const LogRow&)>;

/// One deterministic run per seed. Clips longer than cfg.clip_cap keep their
/// trailing frames. Throws TrainingDiverged on a non-finite loss and
/// DomainError on an empty training set.
std::vector<SeedRun> train(const std::vector<Clip>& train_clips,
                           const std::vector<Clip>& val_clips, const TrainConfig& cfg,
                           const ProgressFn& progress = {});

/// Raw (no post-processing) mean frame error in cm over the clips.
double raw_error_cm(const Model& model, const std::vector<Clip>& clips);

/// Writes <out>/<seed>/{checkpoint.bin, config.json, run.json, log.csv}.
void save_runs(const std::vector<SeedRun>& runs, const TrainConfig& cfg,
               const std::filesystem::path& out_dir);
void write_log_csv(const std::vector<LogRow>& log, const std::filesystem::path& path);

}  // namespace egotarget
