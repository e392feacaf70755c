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

#include "egotarget/training.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "egotarget/checkpoint.hpp"
#include "egotarget/config_json.hpp"
#include "egotarget/error.hpp"
#include "egotarget/io_util.hpp"

namespace egotarget {

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  need(learning_rate > 0.0, "learning_rate", "must be > 0");
  need(weight_decay >= 0.0, "weight_decay", "must be >= 0");
  need(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1", "must be in [0, 1)");
  need(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2", "must be in [0, 1)");
  need(adam_eps > 0.0, "adam_eps", "must be > 0");
  need(batch_size >= 1, "batch_size", "must be >= 1");
  need(epochs >= 0, "epochs", "must be >= 0");
  need(!seeds.empty(), "seeds", "must not be empty");
  need(clip_cap >= 1 && clip_cap <= kTrainClipCap, "clip_cap", "must be in [1, 25]");
  need(patience >= 0, "patience", "must be >= 0");
  try {
    loss.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("loss." + e.field(), e.detail());
  }
  try {
    model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("model." + e.field(), e.detail());
  }
}

std::vector<Batch> pad_and_batch(const std::vector<const Clip*>& clips,
                                 int batch_size) {
  if (batch_size < 1) throw DomainError("pad_and_batch: batch size must be >= 1");
  std::vector<Batch> out;
  for (std::size_t start = 0; start < clips.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(clips.size(), start + static_cast<std::size_t>(batch_size));
    Batch b;
    for (std::size_t i = start; i < end; ++i) {
      b.clips.push_back(clips[i]);
      b.lengths.push_back(clips[i]->length());
      b.max_length = std::max(b.max_length, clips[i]->length());
    }
    b.mask = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.clips.size()),
                                   b.max_length);
    for (std::size_t i = 0; i < b.clips.size(); ++i) {
      b.mask.row(static_cast<Eigen::Index>(i)).head(b.lengths[i]).setOnes();
    }
    out.push_back(std::move(b));
  }
  return out;
}

BatchLoss batch_loss(const Model& model, const Batch& batch, const LossConfig& cfg,
                     ModelParams* grads) {
  BatchLoss out;
  out.per_frame = Eigen::MatrixXd::Zero(batch.mask.rows(), batch.max_length);
  const WorkspaceBox& ws = model.config().workspace;
  for (std::size_t b = 0; b < batch.clips.size(); ++b) {
    const Clip& clip = *batch.clips[b];
    SequenceForward fwd(model, clip);
    SequenceLossGradient g;
    const LossBreakdown loss =
        sequence_loss(fwd.outputs(), clip, cfg, ws, grads ? &g : nullptr);
    for (int t = 0; t < clip.length(); ++t) {
      out.per_frame(static_cast<Eigen::Index>(b), t) =
          batch.mask(static_cast<Eigen::Index>(b), t) * loss.weights[t] *
          (loss.position[t] + cfg.delta * (loss.hand[t] + loss.time[t]));
    }
    out.total += loss.total;
    out.position += loss.position_sum();
    out.hand += loss.hand_sum();
    out.time += loss.time_sum();
    if (grads) fwd.backward(g.d_points, g.d_hand, g.d_time, *grads);
  }
  return out;
}

namespace {

struct Slot {
  double* data;
  Eigen::Index size;
};

std::vector<Slot> slots(ModelParams& p) {
  std::vector<Slot> out;
  p.for_each([&out](const std::string&, auto& t) { out.push_back({t.data(), t.size()}); });
  return out;
}

std::vector<const double*> const_slots(const ModelParams& p) {
  std::vector<const double*> out;
  p.for_each([&out](const std::string&, const auto& t) { out.push_back(t.data()); });
  return out;
}

bool all_finite(const ModelParams& p) {
  bool ok = true;
  p.for_each([&ok](const std::string&, const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

void scale(ModelParams& p, double s) {
  p.for_each([s](const std::string&, auto& t) { t *= s; });
}

}  // namespace

AdamOptimizer::AdamOptimizer(const ModelParams& like, double lr, double weight_decay,
                             double beta1, double beta2, double eps)
    : lr_(lr),
      wd_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(like.zeros_like()),
      v_(like.zeros_like()) {}

void AdamOptimizer::step(Model& model, const ModelParams& grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, steps_);
  const double c2 = 1.0 - std::pow(beta2_, steps_);
  std::vector<Slot> theta = slots(model.params());
  std::vector<Slot> m = slots(m_);
  std::vector<Slot> v = slots(v_);
  std::vector<const double*> g = const_slots(grads);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (Eigen::Index i = 0; i < theta[k].size; ++i) {
      double& w = theta[k].data[i];
      const double gi = g[k][i] + wd_ * w;
      double& mi = m[k].data[i];
      double& vi = v[k].data[i];
      mi = beta1_ * mi + (1.0 - beta1_) * gi;
      vi = beta2_ * vi + (1.0 - beta2_) * gi * gi;
      w -= lr_ * (mi / c1) / (std::sqrt(vi / c2) + eps_);
    }
  }
  model.round_to_float();
}

double raw_error_cm(const Model& model, const std::vector<Clip>& clips) {
  double sum = 0.0;
  long frames = 0;
  const WorkspaceBox& ws = model.config().workspace;
  for (const Clip& clip : clips) {
    SequenceForward fwd(model, clip);
    const Eigen::Matrix3Xd& pts = fwd.outputs().raw_points;
    for (int t = 0; t < clip.length(); ++t) {
      sum += 100.0 * (ws.to_meters(pts.col(t)) - clip.frames[t].target_gt).norm();
      ++frames;
    }
  }
  return frames ? sum / static_cast<double>(frames) : 0.0;
}

namespace {

LogRow mean_row(int epoch, const char* split, const BatchLoss& sum, std::size_t n) {
  const double d = n ? static_cast<double>(n) : 1.0;
  return {epoch, split, sum.total / d, sum.position / d, sum.hand / d, sum.time / d};
}

void add(BatchLoss& acc, const BatchLoss& b) {
  acc.total += b.total;
  acc.position += b.position;
  acc.hand += b.hand;
  acc.time += b.time;
}

SeedRun train_one(const std::vector<const Clip*>& train_clips,
                  const std::vector<Clip>& val_clips, const TrainConfig& cfg,
                  std::uint64_t seed, const ProgressFn& progress) {
  Model model = Model::initialize(cfg.model, seed);
  SeedRun run{seed, model, 0, 0.0, {}};
  AdamOptimizer adam(model.params(), cfg.learning_rate, cfg.weight_decay,
                     cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  std::mt19937_64 rng(seed ^ 0x7a1b5eedULL);
  std::vector<const Clip*> order = train_clips;
  std::vector<const Clip*> val_ptrs;
  for (const Clip& c : val_clips) val_ptrs.push_back(&c);

  run.best_val_error_cm = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    BatchLoss epoch_sum;
    for (const Batch& batch : pad_and_batch(order, cfg.batch_size)) {
      ModelParams grads = model.params().zeros_like();
      const BatchLoss loss = batch_loss(model, batch, cfg.loss, &grads);
      if (!std::isfinite(loss.total) || !all_finite(grads)) {
        throw TrainingDiverged(epoch, "non-finite loss or gradient");
      }
      scale(grads, 1.0 / static_cast<double>(batch.clips.size()));
      adam.step(model, grads);
      add(epoch_sum, loss);
    }
    run.log.push_back(mean_row(epoch, "train", epoch_sum, order.size()));
    if (progress) progress(seed, run.log.back());

    if (val_ptrs.empty()) continue;
    BatchLoss val_sum;
    for (const Batch& batch : pad_and_batch(val_ptrs, cfg.batch_size)) {
      add(val_sum, batch_loss(model, batch, cfg.loss, nullptr));
    }
    if (!std::isfinite(val_sum.total)) {
      throw TrainingDiverged(epoch, "non-finite validation loss");
    }
    run.log.push_back(mean_row(epoch, "val", val_sum, val_ptrs.size()));
    if (progress) progress(seed, run.log.back());

    const double err = raw_error_cm(model, val_clips);
    if (err < run.best_val_error_cm) {
      run.best_val_error_cm = err;
      run.best_epoch = epoch;
      run.checkpoint = model;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  if (val_ptrs.empty()) {
    run.checkpoint = model;
    run.best_epoch = cfg.epochs;
    run.best_val_error_cm = 0.0;
  }
  return run;
}

}  // namespace

std::vector<SeedRun> train(const std::vector<Clip>& train_clips,
                           const std::vector<Clip>& val_clips, const TrainConfig& cfg,
                           const ProgressFn& progress) {
  cfg.validate();
  if (train_clips.empty()) throw DomainError("train: empty training split");
  // Over-long clips are truncated to their trailing frames.
  std::deque<Clip> capped;
  std::vector<const Clip*> clips;
  for (const Clip& c : train_clips) {
    if (c.length() > cfg.clip_cap) {
      capped.push_back(cap_clip(c, cfg.clip_cap));
      clips.push_back(&capped.back());
    } else {
      clips.push_back(&c);
    }
  }
  std::vector<SeedRun> runs;
  for (std::uint64_t seed : cfg.seeds) {
    runs.push_back(train_one(clips, val_clips, cfg, seed, progress));
  }
  return runs;
}

void write_log_csv(const std::vector<LogRow>& log, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss << "epoch,split,total,position,hand,time\n";
  for (const LogRow& r : log) {
    ss << r.epoch << ',' << r.split << ',' << format_double(r.total) << ','
       << format_double(r.position) << ',' << format_double(r.hand) << ','
       << format_double(r.time) << '\n';
  }
  write_text_file(path, ss.str());
}

void save_runs(const std::vector<SeedRun>& runs, const TrainConfig& cfg,
               const std::filesystem::path& out_dir) {
  for (const SeedRun& run : runs) {
    const std::filesystem::path dir = out_dir / std::to_string(run.seed);
    std::filesystem::create_directories(dir);
    save_checkpoint(run.checkpoint, dir / "checkpoint.bin");
    nlohmann::json j = to_json(cfg);
    j["seeds"] = nlohmann::json::array({run.seed});
    nlohmann::json meta{{"seed", run.seed},
                        {"best_epoch", run.best_epoch},
                        {"best_val_error_cm", run.best_val_error_cm}};
    write_text_file(dir / "config.json", j.dump(2) + "\n");
    write_text_file(dir / "run.json", meta.dump(2) + "\n");
    write_log_csv(run.log, dir / "log.csv");
  }
}

}  // namespace egotarget
