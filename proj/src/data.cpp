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

#include "egotarget/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "egotarget/error.hpp"

namespace egotarget {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTestSeen:
      return "test_seen";
    case Split::kTestUnseen:
      return "test_unseen";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test_seen") return Split::kTestSeen;
  if (name == "test_unseen") return Split::kTestUnseen;
  throw DomainError("unknown split '" + std::string(name) + "'");
}

Eigen::VectorXd HandLandmarks::stacked() const {
  Eigen::VectorXd out(2 * kNumLandmarks);
  for (int i = 0; i < kNumLandmarks; ++i) {
    out.segment<2>(2 * i) = points[static_cast<std::size_t>(i)];
  }
  return out;
}

void HandLandmarks::validate() const {
  for (const auto& p : points) {
    if (!p.allFinite()) throw DomainError("landmarks: non-finite point");
    if (!present && !p.isZero(0.0)) {
      throw DomainError("landmarks: absent hand must have all-zero points");
    }
  }
}

void Clip::validate() const {
  if (length() < 2) throw DomainError("clip " + id + ": needs T >= 2");
  if (split == Split::kTrain && length() > kTrainClipCap) {
    throw DomainError("clip " + id + ": training clip exceeds frame cap");
  }
  intrinsics.validate();
  for (const auto& f : frames) {
    f.landmarks.validate();
    if (!f.target_gt.allFinite() || !(f.target_gt.z() > 0.0)) {
      throw DomainError("clip " + id + ": invalid target_gt");
    }
    if (f.visual.size() != visual_shape.size()) {
      throw DomainError("clip " + id + ": visual size mismatch");
    }
  }
}

void SyntheticWorldConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  try {
    intrinsics.validate();
  } catch (const DomainError& e) {
    throw ConfigError("intrinsics", e.what());
  }
  try {
    workspace.validate();
  } catch (const DomainError& e) {
    throw ConfigError("workspace", e.what());
  }
  need(visual_shape.height > 0 && visual_shape.width > 0 &&
           visual_shape.channels == 3,
       "visual_shape", "must be H x W x 3 with positive H, W");
  need(((target_max - target_min).array() >= 0.0).all(), "target_max",
       "must be >= target_min");
  need(target_min.z() > 0.0, "target_min", "depth must be positive");
  need(((hand_start_max - hand_start_min).array() >= 0.0).all(),
       "hand_start_max", "must be >= hand_start_min");
  need(hand_start_min.z() > 0.0, "hand_start_min", "depth must be positive");
  need(peak_speed > 0.0, "peak_speed", "must be positive");
  need(ease_shape >= 1.0, "ease_shape", "must be >= 1");
  need(arc_amplitude >= 0.0, "arc_amplitude", "must be >= 0");
  need(ego_rotation >= 0.0, "ego_rotation", "must be >= 0");
  need(ego_translation >= 0.0, "ego_translation", "must be >= 0");
  need(landmark_jitter >= 0.0, "landmark_jitter", "must be >= 0");
  need(hand_scale >= 0.0, "hand_scale", "must be >= 0");
  need(absent_fraction >= 0.0 && absent_fraction < 1.0, "absent_fraction",
       "must be in [0, 1)");
  need(num_distractors >= 0, "num_distractors", "must be >= 0");
  need(marker_radius > 0.0, "marker_radius", "must be > 0");
  need(hand_blob_radius > 0.0, "hand_blob_radius", "must be > 0");
  need(clip_length_min >= 2, "clip_length_min", "must be >= 2");
  need(clip_length_max >= clip_length_min, "clip_length_max",
       "must be >= clip_length_min");
  need(clip_length_mean >= clip_length_min &&
           clip_length_mean <= clip_length_max,
       "clip_length_mean", "must lie in [min, max]");
  need(fingertip_index >= 0 && fingertip_index < kNumLandmarks,
       "fingertip_index", "must be in [0, 21)");
  need(max_retries >= 1, "max_retries", "must be >= 1");
}

namespace {

// Hand template in meters with the index fingertip at the origin; wrist below
// the fingers (+y points down in camera coordinates).
constexpr std::array<std::array<double, 3>, kNumLandmarks> kHandTemplate{{
    {0.000, 0.100, 0.020},                                                // wrist
    {-0.030, 0.080, 0.015}, {-0.050, 0.060, 0.010}, {-0.060, 0.040, 0.005},
    {-0.070, 0.025, 0.000},                                               // thumb
    {-0.015, 0.045, 0.010}, {-0.012, 0.030, 0.006}, {-0.006, 0.013, 0.003},
    {0.000, 0.000, 0.000},                                                // index
    {0.005, 0.045, 0.010}, {0.007, 0.027, 0.006}, {0.009, 0.012, 0.003},
    {0.011, 0.000, 0.000},                                                // middle
    {0.022, 0.048, 0.010}, {0.025, 0.032, 0.006}, {0.027, 0.020, 0.003},
    {0.029, 0.010, 0.000},                                                // ring
    {0.037, 0.055, 0.010}, {0.041, 0.043, 0.006}, {0.044, 0.034, 0.003},
    {0.046, 0.026, 0.000},                                                // pinky
}};

constexpr double kMinDepth = 0.05;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct SceneLook {
  Eigen::Vector3d background;
  Eigen::Vector3d marker;
  double stripe_freq;
  double stripe_angle;
  double stripe_phase;
};

SceneLook scene_look(int scene_id) {
  std::mt19937_64 rng(splitmix(0x5ce9e000ULL + static_cast<std::uint64_t>(scene_id)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SceneLook look;
  look.background = Eigen::Vector3d(0.2 + 0.4 * u(rng), 0.2 + 0.4 * u(rng),
                                    0.2 + 0.4 * u(rng));
  // Saturated marker color, kept away from the skin tone of the hand blob.
  look.marker = Eigen::Vector3d(0.1 * u(rng), 0.3 + 0.7 * u(rng),
                                0.3 + 0.7 * u(rng));
  look.stripe_freq = 0.2 + 0.6 * u(rng);
  look.stripe_angle = std::numbers::pi * u(rng);
  look.stripe_phase = 2.0 * std::numbers::pi * u(rng);
  return look;
}

const Eigen::Vector3d kSkin(0.95, 0.75, 0.6);

Eigen::Vector3d uniform_in_box(std::mt19937_64& rng, const Eigen::Vector3d& lo,
                               const Eigen::Vector3d& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Vector3d p;
  for (int i = 0; i < 3; ++i) p[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return p;
}

// Monotone ease-in/ease-out progress with s(0)=0, s(1)=1, s'(0)=s'(1)=0.
double ease(double tau, double shape) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  const double a = std::pow(tau, shape);
  const double b = std::pow(1.0 - tau, shape);
  return a / (a + b);
}

bool in_image(const Eigen::Vector2d& px, const CameraIntrinsics& k) {
  return px.x() >= 0.0 && px.x() < k.width && px.y() >= 0.0 &&
         px.y() < k.height;
}

struct Disk {
  Eigen::Vector2d center;  // render pixels
  double radius;           // render pixels
  Eigen::Vector3d color;
};

void render(const SyntheticWorldConfig& cfg, const SceneLook& look,
            const std::vector<Disk>& disks, Eigen::VectorXf& out) {
  const int h = cfg.visual_shape.height;
  const int w = cfg.visual_shape.width;
  out.resize(cfg.visual_shape.size());
  const double ca = std::cos(look.stripe_angle);
  const double sa = std::sin(look.stripe_angle);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      Eigen::Vector3d c =
          look.background *
          (1.0 + 0.25 * std::sin(look.stripe_freq * (px * ca + py * sa) * 64.0 / w +
                                 look.stripe_phase));
      for (const auto& d : disks) {
        const double dist = (Eigen::Vector2d(px, py) - d.center).norm();
        const double cover = std::clamp(d.radius - dist + 0.5, 0.0, 1.0);
        c = (1.0 - cover) * c + cover * d.color;
      }
      for (int ch = 0; ch < 3; ++ch) {
        out[(y * w + x) * 3 + ch] = static_cast<float>(std::clamp(c[ch], 0.0, 1.0));
      }
    }
  }
}

std::optional<GeneratedClip> try_generate(const SyntheticWorldConfig& cfg,
                                          std::mt19937_64& rng, int length,
                                          const SceneLook& look) {
  const CameraIntrinsics& k = cfg.intrinsics;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // Camera trajectory: random-walk ego-motion, world = first camera frame.
  std::vector<RigidTransform> poses(static_cast<std::size_t>(length));
  for (int t = 1; t < length; ++t) {
    const Eigen::Vector3d rot(gauss(rng), gauss(rng), gauss(rng));
    const Eigen::Vector3d trans(gauss(rng), gauss(rng), gauss(rng));
    poses[t] = poses[t - 1] * RigidTransform::from_axis_angle(
                                  cfg.ego_rotation * rot,
                                  cfg.ego_translation * trans);
  }
  const RigidTransform& last = poses.back();

  const Eigen::Vector3d target_last = uniform_in_box(rng, cfg.target_min, cfg.target_max);
  const Eigen::Vector3d target_world = apply_transform(last, target_last);
  const Eigen::Vector3d start_world =
      uniform_in_box(rng, cfg.hand_start_min, cfg.hand_start_max);

  Eigen::Vector3d dir = target_world - start_world;
  const double path = dir.norm();
  if (path < 1e-6) return std::nullopt;
  dir /= path;
  Eigen::Vector3d side = dir.cross(Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)));
  if (side.norm() < 1e-9) return std::nullopt;
  side.normalize();
  const double arc = cfg.arc_amplitude * (2.0 * u01(rng) - 1.0);
  const double roll = 0.4 * (2.0 * u01(rng) - 1.0);
  const Eigen::Matrix3d hand_rot =
      Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix();

  std::vector<Eigen::Vector3d> distractors;
  for (int i = 0; i < cfg.num_distractors; ++i) {
    distractors.push_back(
        apply_transform(last, uniform_in_box(rng, cfg.target_min, cfg.target_max)));
  }

  const int absent_prefix =
      static_cast<int>(std::floor(u01(rng) * cfg.absent_fraction * length));

  GeneratedClip out;
  out.camera_poses = poses;
  Clip& clip = out.clip;
  clip.scene_id = cfg.scene_id;
  clip.intrinsics = k;
  clip.visual_shape = cfg.visual_shape;
  clip.frames.resize(static_cast<std::size_t>(length));

  const double sx = static_cast<double>(cfg.visual_shape.width) / k.width;
  const double sy = static_cast<double>(cfg.visual_shape.height) / k.height;
  const double render_scale = 0.5 * (sx + sy);

  std::vector<Eigen::Vector3d> tips_world(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    const double s = ease(length > 1 ? static_cast<double>(t) / (length - 1) : 1.0,
                          cfg.ease_shape);
    tips_world[t] = start_world + dir * (s * path) +
                    side * (arc * std::sin(std::numbers::pi * s));
  }
  for (int t = 1; t < length; ++t) {
    if ((tips_world[t] - tips_world[t - 1]).norm() > cfg.peak_speed) {
      return std::nullopt;
    }
  }

  std::vector<Eigen::Vector2d> tip_px(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    Frame& frame = clip.frames[t];
    const RigidTransform world_to_cam = poses[t].inverse();
    frame.target_gt = apply_transform(world_to_cam, target_world);
    if (frame.target_gt.z() < kMinDepth) return std::nullopt;
    const Eigen::Vector3d tgt_normalized = cfg.workspace.to_normalized(frame.target_gt);
    if (tgt_normalized.cwiseAbs().maxCoeff() > 1.0) return std::nullopt;
    const Eigen::Vector2d target_px = project(frame.target_gt, k);
    if (!in_image(target_px, k)) return std::nullopt;

    const Eigen::Vector3d tip_cam = apply_transform(world_to_cam, tips_world[t]);
    if (tip_cam.z() < kMinDepth) return std::nullopt;

    std::array<Eigen::Vector3d, kNumLandmarks> pts3d;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i = 0; i < kNumLandmarks; ++i) {
      int src = i;
      if (i == cfg.fingertip_index) src = kIndexFingertip;
      else if (i == kIndexFingertip) src = cfg.fingertip_index;
      const auto& o = kHandTemplate[static_cast<std::size_t>(src)];
      pts3d[i] = tip_cam + cfg.hand_scale * (hand_rot * Eigen::Vector3d(o[0], o[1], o[2]));
      if (pts3d[i].z() < kMinDepth) return std::nullopt;
      centroid += pts3d[i];
    }
    centroid /= kNumLandmarks;

    HandLandmarks& lm = frame.landmarks;
    tip_px[t] = project(tip_cam, k);
    // Jitter draws are consumed for every frame so presence does not shift the
    // random stream.
    std::array<Eigen::Vector2d, kNumLandmarks> jitter;
    for (auto& j : jitter) j = Eigen::Vector2d(gauss(rng), gauss(rng));
    const bool visible = in_image(tip_px[t], k);
    if (t >= absent_prefix && visible) {
      lm.present = true;
      for (int i = 0; i < kNumLandmarks; ++i) {
        Eigen::Vector2d px = project(pts3d[i], k);
        if (i != cfg.fingertip_index) px += cfg.landmark_jitter * jitter[i];
        lm.points[i] = px;
      }
    }

    std::vector<Disk> disks;
    for (const auto& d : distractors) {
      const Eigen::Vector3d dc = apply_transform(world_to_cam, d);
      if (dc.z() < kMinDepth) continue;
      const Eigen::Vector2d dp = project(dc, k);
      disks.push_back({Eigen::Vector2d(dp.x() * sx, dp.y() * sy),
                       render_scale * k.fx * cfg.marker_radius / dc.z(), look.marker});
    }
    disks.push_back({Eigen::Vector2d(target_px.x() * sx, target_px.y() * sy),
                     render_scale * k.fx * cfg.marker_radius / frame.target_gt.z(),
                     look.marker});
    const Eigen::Vector2d hand_px = project(centroid, k);
    disks.push_back({Eigen::Vector2d(hand_px.x() * sx, hand_px.y() * sy),
                     render_scale * k.fx * cfg.hand_blob_radius * cfg.hand_scale /
                         centroid.z(),
                     kSkin});
    render(cfg, look, disks, frame.visual);
  }

  // The hand must settle: fingertip pixel steps over the last 10% of frames
  // stay below the clip's largest step.
  double max_step = 0.0;
  for (int t = 1; t < length; ++t) {
    max_step = std::max(max_step, (tip_px[t] - tip_px[t - 1]).norm());
  }
  const int tail = std::max(1, static_cast<int>(std::ceil(0.1 * length)));
  for (int t = length - tail; t < length; ++t) {
    if (t >= 1 && !((tip_px[t] - tip_px[t - 1]).norm() < max_step)) {
      return std::nullopt;
    }
  }
  if (!clip.frames.back().landmarks.present) return std::nullopt;
  return out;
}

}  // namespace

int sample_clip_length(const SyntheticWorldConfig& cfg, std::uint64_t rng_seed) {
  std::mt19937_64 rng(splitmix(rng_seed ^ 0x1e9c7a11ULL));
  const double excess = cfg.clip_length_mean - cfg.clip_length_min;
  int length = cfg.clip_length_min;
  if (excess > 0.0) {
    std::gamma_distribution<double> gamma(2.0, excess / 2.0);
    length += static_cast<int>(std::lround(gamma(rng)));
  }
  return std::min(length, cfg.clip_length_max);
}

GeneratedClip generate_clip_with_poses(const SyntheticWorldConfig& cfg,
                                       std::uint64_t rng_seed) {
  cfg.validate();
  const int length = sample_clip_length(cfg, rng_seed);
  const SceneLook look = scene_look(cfg.scene_id);
  std::mt19937_64 rng(splitmix(rng_seed));
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    if (auto out = try_generate(cfg, rng, length, look)) {
      out->clip.id = "clip_s" + std::to_string(cfg.scene_id) + "_" +
                     std::to_string(rng_seed);
      return std::move(*out);
    }
  }
  throw GenerationFailed("no valid reach motion after " +
                         std::to_string(cfg.max_retries) + " attempts");
}

Clip generate_clip(const SyntheticWorldConfig& cfg, std::uint64_t rng_seed) {
  return generate_clip_with_poses(cfg, rng_seed).clip;
}

Clip cap_clip(Clip clip, int cap) {
  if (clip.length() > cap) {
    clip.frames.erase(clip.frames.begin(), clip.frames.end() - cap);
  }
  return clip;
}

DatasetSplits split_dataset(std::vector<Clip> clips, const SplitRatios& ratios,
                            std::uint64_t rng_seed) {
  const std::array<double, 4> r{ratios.train, ratios.val, ratios.test_seen,
                                ratios.test_unseen};
  for (double v : r) {
    if (!(v >= 0.0)) throw SplitError("split ratios must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] + r[3] - 1.0) > 1e-9) {
    throw SplitError("split ratios must sum to 1");
  }
  const int n = static_cast<int>(clips.size());
  auto count_for = [n](double ratio) {
    return static_cast<int>(std::lround(ratio * n));
  };
  std::mt19937_64 rng(splitmix(rng_seed ^ 0x5b117ULL));

  // Hold out whole scenes until the unseen quota is met.
  std::set<int> unseen_scenes;
  if (r[3] > 0.0) {
    const int quota = count_for(r[3]);
    if (quota == 0) throw SplitError("too few clips for a test_unseen split");
    std::map<int, int> per_scene;
    for (const auto& c : clips) ++per_scene[c.scene_id];
    std::vector<int> scenes;
    for (const auto& [id, count] : per_scene) scenes.push_back(id);
    std::shuffle(scenes.begin(), scenes.end(), rng);
    int taken = 0;
    for (int id : scenes) {
      if (taken >= quota) break;
      unseen_scenes.insert(id);
      taken += per_scene[id];
    }
    if (unseen_scenes.size() == per_scene.size()) {
      throw SplitError("test_unseen would consume every scene");
    }
  }

  DatasetSplits out;
  std::vector<Clip> seen;
  for (auto& c : clips) {
    if (unseen_scenes.count(c.scene_id)) {
      c.split = Split::kTestUnseen;
      out.test_unseen.push_back(std::move(c));
    } else {
      seen.push_back(std::move(c));
    }
  }
  std::shuffle(seen.begin(), seen.end(), rng);
  const int n_val = count_for(r[1]);
  const int n_test = count_for(r[2]);
  const int n_train = static_cast<int>(seen.size()) - n_val - n_test;
  if ((r[1] > 0.0 && n_val == 0) || (r[2] > 0.0 && n_test == 0) ||
      (r[0] > 0.0 && n_train < 1) || n_train < 0) {
    throw SplitError("too few clips for the requested ratios");
  }
  for (int i = 0; i < static_cast<int>(seen.size()); ++i) {
    Clip& c = seen[i];
    if (i < n_train) {
      c.split = Split::kTrain;
      out.train.push_back(cap_clip(std::move(c)));
    } else if (i < n_train + n_val) {
      c.split = Split::kVal;
      out.val.push_back(std::move(c));
    } else {
      c.split = Split::kTestSeen;
      out.test_seen.push_back(std::move(c));
    }
  }
  return out;
}

void GenerateConfig::validate() const {
  world.validate();
  if (num_clips < 1) throw ConfigError("num_clips", "must be >= 1");
  if (num_scenes < 1) throw ConfigError("num_scenes", "must be >= 1");
}

DatasetSplits generate_dataset(const GenerateConfig& cfg) {
  cfg.validate();
  std::vector<Clip> clips;
  clips.reserve(static_cast<std::size_t>(cfg.num_clips));
  SyntheticWorldConfig world = cfg.world;
  for (int i = 0; i < cfg.num_clips; ++i) {
    world.scene_id = cfg.world.scene_id + i % cfg.num_scenes;
    const std::uint64_t clip_seed =
        splitmix(cfg.world.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(i));
    clips.push_back(generate_clip(world, clip_seed));
  }
  return split_dataset(std::move(clips), cfg.ratios, cfg.world.seed);
}

}  // namespace egotarget
