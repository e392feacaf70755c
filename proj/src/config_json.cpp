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

#include "egotarget/config_json.hpp"

#include <fstream>
#include <functional>
#include <set>

#include "egotarget/error.hpp"

namespace egotarget {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Rethrows a validation failure with the field prefixed by `path`.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    throw ConfigError(join(path, e.field()), e.detail());
  }
}

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

// Optional-key reader that remembers which keys it consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "must be a JSON object");
    }
  }

  std::string field(const std::string& key) const { return join(path_, key); }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      const auto x = v->get<long long>();
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(field(key), "out of range");
      out = static_cast<int>(x);
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(field(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, Eigen::Vector3d& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 3) {
        throw ConfigError(field(key), "expected an array of 3 numbers");
      }
      for (int i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(field(key), "expected numbers");
        out[i] = (*v)[i].get<double>();
      }
    }
  }
  void object(const std::string& key, const std::function<void(const json&,
                                                                const std::string&)>& f) {
    if (const json* v = find(key)) f(*v, field(key));
  }

  /// Rejects keys that no getter asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

GridSpec grid_from_json(const json& j, const std::string& path) {
  GridSpec g;
  Reader r(j, path);
  r.get("bins", g.bins);
  if (const json* v = r.find("gamma"); v && !v->is_null()) {
    if (!v->is_number()) throw ConfigError(r.field("gamma"), "expected a number");
    g.gamma = v->get<double>();
  }
  r.finish();
  return g;
}

WorkspaceBox workspace_from_json(const json& j, const std::string& path) {
  WorkspaceBox b;
  Reader r(j, path);
  r.get("min", b.min);
  r.get("max", b.max);
  r.finish();
  try {
    b.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return b;
}

VisualShape shape_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(path, "expected [height, width, channels]");
  }
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected integers");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

json shape_to_json(const VisualShape& s) {
  return json::array({s.height, s.width, s.channels});
}

CameraIntrinsics intrinsics_config(const json& j, const std::string& path) {
  CameraIntrinsics k;
  Reader r(j, path);
  r.get("fx", k.fx);
  r.get("fy", k.fy);
  r.get("cx", k.cx);
  r.get("cy", k.cy);
  r.get("width", k.width);
  r.get("height", k.height);
  r.finish();
  return k;
}

json intrinsics_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
          {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

}  // namespace

json to_json(const GridSpec& grid) {
  json j{{"bins", grid.bins}};
  j["gamma"] = grid.gamma ? json(*grid.gamma) : json(nullptr);
  return j;
}

json to_json(const WorkspaceBox& box) {
  return {{"min", vec3(box.min)}, {"max", vec3(box.max)}};
}

json to_json(const ModelConfig& cfg) {
  return {
      {"input_shape", shape_to_json(cfg.input_shape)},
      {"encoder", cfg.encoder == VisualEncoderKind::kConv4 ? "conv4" : "features"},
      {"conv_channels", cfg.conv_channels},
      {"visual_dim", cfg.visual_dim},
      {"hand_hidden", cfg.hand_hidden},
      {"hand_dim", cfg.hand_dim},
      {"fused_dim", cfg.fused_dim},
      {"lstm_layers", cfg.lstm_layers},
      {"lstm_hidden", cfg.lstm_hidden},
      {"head_hidden", cfg.head_hidden},
      {"aux_hidden", cfg.aux_hidden},
      {"grid", to_json(cfg.grid)},
      {"use_hand_features", cfg.use_hand_features},
      {"coord_channels", cfg.coord_channels},
      {"workspace", to_json(cfg.workspace)},
  };
}

ModelConfig model_config_from_json(const json& j, const std::string& path) {
  ModelConfig cfg;
  Reader r(j, path);
  if (const json* v = r.find("input_shape")) {
    cfg.input_shape = shape_from_json(*v, r.field("input_shape"));
  }
  if (const json* v = r.find("encoder")) {
    const std::string name = v->is_string() ? v->get<std::string>() : "";
    if (name == "conv4") {
      cfg.encoder = VisualEncoderKind::kConv4;
    } else if (name == "features") {
      cfg.encoder = VisualEncoderKind::kFeatures;
    } else {
      throw ConfigError(r.field("encoder"), "expected \"conv4\" or \"features\"");
    }
  }
  if (const json* v = r.find("conv_channels")) {
    if (!v->is_array() || v->size() != 4) {
      throw ConfigError(r.field("conv_channels"), "expected 4 integers");
    }
    for (int i = 0; i < 4; ++i) {
      if (!(*v)[i].is_number_integer()) {
        throw ConfigError(r.field("conv_channels"), "expected 4 integers");
      }
      cfg.conv_channels[i] = (*v)[i].get<int>();
    }
  }
  r.get("visual_dim", cfg.visual_dim);
  r.get("hand_hidden", cfg.hand_hidden);
  r.get("hand_dim", cfg.hand_dim);
  r.get("fused_dim", cfg.fused_dim);
  r.get("lstm_layers", cfg.lstm_layers);
  r.get("lstm_hidden", cfg.lstm_hidden);
  r.get("head_hidden", cfg.head_hidden);
  r.get("aux_hidden", cfg.aux_hidden);
  r.object("grid", [&](const json& v, const std::string& p) { cfg.grid = grid_from_json(v, p); });
  r.get("use_hand_features", cfg.use_hand_features);
  r.get("coord_channels", cfg.coord_channels);
  r.object("workspace", [&](const json& v, const std::string& p) {
    cfg.workspace = workspace_from_json(v, p);
  });
  r.finish();
  validated(path, [&] { cfg.validate(); });
  return cfg;
}

json to_json(const LossConfig& cfg) {
  return {{"delta", cfg.delta},
          {"truncation_cap", cfg.truncation_cap},
          {"weight_start", cfg.weight_start},
          {"weight_end", cfg.weight_end},
          {"use_hand_loss", cfg.use_hand_loss},
          {"use_time_loss", cfg.use_time_loss},
          {"fingertip_index", cfg.fingertip_index}};
}

LossConfig loss_config_from_json(const json& j, const std::string& path) {
  LossConfig cfg;
  Reader r(j, path);
  r.get("delta", cfg.delta);
  r.get("truncation_cap", cfg.truncation_cap);
  r.get("weight_start", cfg.weight_start);
  r.get("weight_end", cfg.weight_end);
  r.get("use_hand_loss", cfg.use_hand_loss);
  r.get("use_time_loss", cfg.use_time_loss);
  r.get("fingertip_index", cfg.fingertip_index);
  r.finish();
  validated(path, [&] { cfg.validate(); });
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"weight_decay", cfg.weight_decay},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_eps", cfg.adam_eps},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"seeds", cfg.seeds},
          {"clip_cap", cfg.clip_cap},
          {"patience", cfg.patience},
          {"loss", to_json(cfg.loss)},
          {"model", to_json(cfg.model)}};
}

TrainConfig train_config_from_json(const json& j, const std::string& path) {
  TrainConfig cfg;
  Reader r(j, path);
  r.get("learning_rate", cfg.learning_rate);
  r.get("weight_decay", cfg.weight_decay);
  r.get("adam_beta1", cfg.adam_beta1);
  r.get("adam_beta2", cfg.adam_beta2);
  r.get("adam_eps", cfg.adam_eps);
  r.get("batch_size", cfg.batch_size);
  r.get("epochs", cfg.epochs);
  if (const json* v = r.find("seeds")) {
    if (!v->is_array()) throw ConfigError(r.field("seeds"), "expected an array");
    cfg.seeds.clear();
    for (const auto& s : *v) {
      if (!s.is_number_unsigned()) {
        throw ConfigError(r.field("seeds"), "expected non-negative integers");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  r.get("clip_cap", cfg.clip_cap);
  r.get("patience", cfg.patience);
  r.object("loss", [&](const json& v, const std::string& p) {
    cfg.loss = loss_config_from_json(v, p);
  });
  r.object("model", [&](const json& v, const std::string& p) {
    cfg.model = model_config_from_json(v, p);
  });
  r.finish();
  validated(path, [&] { cfg.validate(); });
  return cfg;
}

json to_json(const SyntheticWorldConfig& cfg) {
  return {{"scene_id", cfg.scene_id},
          {"intrinsics", intrinsics_json(cfg.intrinsics)},
          {"visual_shape", shape_to_json(cfg.visual_shape)},
          {"workspace", to_json(cfg.workspace)},
          {"target_min", vec3(cfg.target_min)},
          {"target_max", vec3(cfg.target_max)},
          {"hand_start_min", vec3(cfg.hand_start_min)},
          {"hand_start_max", vec3(cfg.hand_start_max)},
          {"peak_speed", cfg.peak_speed},
          {"ease_shape", cfg.ease_shape},
          {"arc_amplitude", cfg.arc_amplitude},
          {"ego_rotation", cfg.ego_rotation},
          {"ego_translation", cfg.ego_translation},
          {"landmark_jitter", cfg.landmark_jitter},
          {"hand_scale", cfg.hand_scale},
          {"absent_fraction", cfg.absent_fraction},
          {"num_distractors", cfg.num_distractors},
          {"marker_radius", cfg.marker_radius},
          {"hand_blob_radius", cfg.hand_blob_radius},
          {"clip_length_min", cfg.clip_length_min},
          {"clip_length_max", cfg.clip_length_max},
          {"clip_length_mean", cfg.clip_length_mean},
          {"fingertip_index", cfg.fingertip_index},
          {"max_retries", cfg.max_retries},
          {"seed", cfg.seed}};
}

SyntheticWorldConfig world_config_from_json(const json& j, const std::string& path) {
  SyntheticWorldConfig cfg;
  Reader r(j, path);
  r.get("scene_id", cfg.scene_id);
  r.object("intrinsics", [&](const json& v, const std::string& p) {
    cfg.intrinsics = intrinsics_config(v, p);
  });
  if (const json* v = r.find("visual_shape")) {
    cfg.visual_shape = shape_from_json(*v, r.field("visual_shape"));
  }
  r.object("workspace", [&](const json& v, const std::string& p) {
    cfg.workspace = workspace_from_json(v, p);
  });
  r.get("target_min", cfg.target_min);
  r.get("target_max", cfg.target_max);
  r.get("hand_start_min", cfg.hand_start_min);
  r.get("hand_start_max", cfg.hand_start_max);
  r.get("peak_speed", cfg.peak_speed);
  r.get("ease_shape", cfg.ease_shape);
  r.get("arc_amplitude", cfg.arc_amplitude);
  r.get("ego_rotation", cfg.ego_rotation);
  r.get("ego_translation", cfg.ego_translation);
  r.get("landmark_jitter", cfg.landmark_jitter);
  r.get("hand_scale", cfg.hand_scale);
  r.get("absent_fraction", cfg.absent_fraction);
  r.get("num_distractors", cfg.num_distractors);
  r.get("marker_radius", cfg.marker_radius);
  r.get("hand_blob_radius", cfg.hand_blob_radius);
  r.get("clip_length_min", cfg.clip_length_min);
  r.get("clip_length_max", cfg.clip_length_max);
  r.get("clip_length_mean", cfg.clip_length_mean);
  r.get("fingertip_index", cfg.fingertip_index);
  r.get("max_retries", cfg.max_retries);
  r.get("seed", cfg.seed);
  r.finish();
  validated(path, [&] { cfg.validate(); });
  return cfg;
}

json to_json(const GenerateConfig& cfg) {
  return {{"world", to_json(cfg.world)},
          {"num_clips", cfg.num_clips},
          {"num_scenes", cfg.num_scenes},
          {"ratios",
           {{"train", cfg.ratios.train},
            {"val", cfg.ratios.val},
            {"test_seen", cfg.ratios.test_seen},
            {"test_unseen", cfg.ratios.test_unseen}}}};
}

GenerateConfig generate_config_from_json(const json& j, const std::string& path) {
  GenerateConfig cfg;
  Reader r(j, path);
  r.object("world", [&](const json& v, const std::string& p) {
    cfg.world = world_config_from_json(v, p);
  });
  r.get("num_clips", cfg.num_clips);
  r.get("num_scenes", cfg.num_scenes);
  r.object("ratios", [&](const json& v, const std::string& p) {
    Reader rr(v, p);
    rr.get("train", cfg.ratios.train);
    rr.get("val", cfg.ratios.val);
    rr.get("test_seen", cfg.ratios.test_seen);
    rr.get("test_unseen", cfg.ratios.test_unseen);
    rr.finish();
  });
  r.finish();
  validated(path, [&] { cfg.validate(); });
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
}

}  // namespace egotarget
