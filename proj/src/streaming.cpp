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

#include "egotarget/streaming.hpp"

#include <chrono>

#include "egotarget/checkpoint.hpp"
#include "egotarget/error.hpp"

namespace egotarget {

using nlohmann::json;

namespace {

template <typename V>
json to_array(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd from_array(const json& j, Eigen::Index size, const std::string& field) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw FormatError(field, "expected an array of " + std::to_string(size) + " numbers");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (!j[i].is_number()) throw FormatError(field, "expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

std::string to_json_line(const FramePrediction& p) {
  json j{{"frame", p.frame},
         {"raw_point_m", to_array(p.raw_point_m)},
         {"final_point_m", to_array(p.final_point_m)},
         {"hand_pred_px", to_array(p.hand_pred_px)},
         {"time_pred", p.time_pred},
         {"raw_point_norm", to_array(p.raw_point_norm)}};
  return j.dump();
}

StreamSession::StreamSession(std::shared_ptr<const Model> model, int fingertip_index)
    : model_(std::move(model)),
      fingertip_index_(fingertip_index),
      recurrent_(RecurrentState::zeros(model_->config())) {}

StreamSession StreamSession::open(const std::filesystem::path& checkpoint) {
  return StreamSession(std::make_shared<const Model>(load_checkpoint(checkpoint)));
}

FramePrediction StreamSession::push_frame(const Frame& frame, const CameraIntrinsics& k) {
  const auto start = std::chrono::steady_clock::now();
  RecurrentState next_rec = recurrent_;
  const FrameOutput out = model_->infer_frame(frame, k, next_rec);
  FramePrediction p;
  p.frame = frames_;
  p.raw_point_norm = out.raw_point;
  p.raw_point_m = model_->config().workspace.to_meters(out.raw_point);
  p.hand_pred_px = out.hand_pred;
  p.time_pred = out.time_pred;
  PostProcessState next_post;
  p.final_point_m =
      post_step(p.raw_point_m, frame.landmarks, k, post_, next_post, fingertip_index_)
          .point;
  // Commit only after every step succeeded.
  recurrent_ = std::move(next_rec);
  post_ = next_post;
  ++frames_;
  if (frames_ > kWarmupFrames) {
    timing_.seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ++timing_.frames;
  }
  return p;
}

json StreamSession::save_state() const {
  json hidden = json::array();
  json cell = json::array();
  for (std::size_t l = 0; l < recurrent_.hidden.size(); ++l) {
    hidden.push_back(to_array(recurrent_.hidden[l]));
    cell.push_back(to_array(recurrent_.cell[l]));
  }
  json post{{"max_offset", post_.max_offset}, {"initialized", post_.initialized}};
  post["prev_hand"] = post_.prev_hand ? to_array(*post_.prev_hand) : json(nullptr);
  return {{"frames", frames_}, {"hidden", hidden}, {"cell", cell}, {"post", post}};
}

void StreamSession::load_state(const json& state) {
  try {
    const ModelConfig& cfg = model_->config();
    RecurrentState rec = RecurrentState::zeros(cfg);
    const json& hidden = state.at("hidden");
    const json& cell = state.at("cell");
    if (!hidden.is_array() || !cell.is_array() ||
        hidden.size() != rec.hidden.size() || cell.size() != rec.cell.size()) {
      throw FormatError("state.hidden", "layer count does not match the model");
    }
    for (std::size_t l = 0; l < rec.hidden.size(); ++l) {
      rec.hidden[l] = from_array(hidden[l], cfg.lstm_hidden, "state.hidden");
      rec.cell[l] = from_array(cell[l], cfg.lstm_hidden, "state.cell");
    }
    PostProcessState post;
    const json& p = state.at("post");
    post.max_offset = p.at("max_offset").get<double>();
    post.initialized = p.at("initialized").get<bool>();
    if (!p.at("prev_hand").is_null()) {
      post.prev_hand = Eigen::Vector2d(from_array(p.at("prev_hand"), 2, "state.post"));
    }
    const int frames = state.at("frames").get<int>();
    recurrent_ = std::move(rec);
    post_ = post;
    frames_ = frames;
    timing_ = {};
  } catch (const json::exception& e) {
    throw FormatError("state", e.what());
  }
}

std::vector<FramePrediction> stream_clip(StreamSession& session, const Clip& clip) {
  std::vector<FramePrediction> out;
  out.reserve(clip.frames.size());
  for (const Frame& f : clip.frames) out.push_back(session.push_frame(f, clip.intrinsics));
  return out;
}

}  // namespace egotarget
