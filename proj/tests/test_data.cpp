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
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "egotarget/data.hpp"
#include "egotarget/error.hpp"
#include "test_util.hpp"

namespace egotarget {
namespace {

using testing::small_world;
using testing::temp_dir;

void expect_clips_equal(const Clip& a, const Clip& b) {
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.scene_id, b.scene_id);
  EXPECT_EQ(a.split, b.split);
  EXPECT_EQ(a.intrinsics, b.intrinsics);
  EXPECT_EQ(a.visual_shape, b.visual_shape);
  ASSERT_EQ(a.length(), b.length());
  for (int t = 0; t < a.length(); ++t) {
    const Frame& fa = a.frames[t];
    const Frame& fb = b.frames[t];
    EXPECT_EQ(fa.visual, fb.visual);
    EXPECT_EQ(fa.landmarks.present, fb.landmarks.present);
    for (int i = 0; i < kNumLandmarks; ++i) {
      EXPECT_EQ(fa.landmarks.points[i], fb.landmarks.points[i]);
    }
    EXPECT_EQ(fa.target_gt, fb.target_gt);
  }
}

TEST(HandLandmarksTest, AbsentMustBeAllZero) {
  HandLandmarks lm;
  EXPECT_NO_THROW(lm.validate());
  lm.points[3] = {1.0, 0.0};
  EXPECT_THROW(lm.validate(), DomainError);
  lm.present = true;
  EXPECT_NO_THROW(lm.validate());
}

TEST(HandLandmarksTest, StackedInterleavesCoordinates) {
  HandLandmarks lm;
  lm.present = true;
  for (int i = 0; i < kNumLandmarks; ++i) lm.points[i] = {i, 100 + i};
  const Eigen::VectorXd s = lm.stacked();
  ASSERT_EQ(s.size(), 42);
  EXPECT_EQ(s[16], 8.0);
  EXPECT_EQ(s[17], 108.0);
}

TEST(GenerateClipTest, SameSeedIsIdentical) {
  const auto cfg = small_world();
  expect_clips_equal(generate_clip(cfg, 42), generate_clip(cfg, 42));
}

TEST(GenerateClipTest, DifferentSeedsDiffer) {
  const auto cfg = small_world();
  EXPECT_NE(generate_clip(cfg, 1).frames.back().target_gt,
            generate_clip(cfg, 2).frames.back().target_gt);
}

TEST(GenerateClipTest, NoEgoMotionKeepsTargetsConstant) {
  auto cfg = small_world();
  cfg.ego_rotation = 0.0;
  cfg.ego_translation = 0.0;
  cfg.landmark_jitter = 0.0;
  const Clip clip = generate_clip(cfg, 5);
  for (const Frame& f : clip.frames) EXPECT_EQ(f.target_gt, clip.frames.back().target_gt);
}

TEST(GenerateClipTest, FinalFingertipHitsProjectedTarget) {
  const auto cfg = small_world();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Clip clip = generate_clip(cfg, seed);
    const Frame& last = clip.frames.back();
    ASSERT_TRUE(last.landmarks.present);
    const Eigen::Vector2d target_px = project(last.target_gt, clip.intrinsics);
    EXPECT_LT((last.landmarks.fingertip() - target_px).norm(), 1.0) << "seed " << seed;
  }
}

TEST(GenerateClipTest, TargetsFollowKnownCameraPoses) {
  const auto cfg = small_world();
  const GeneratedClip g = generate_clip_with_poses(cfg, 9);
  const int last = g.clip.length() - 1;
  // Frame-t target = (pose_t^-1 * pose_T) applied to the last-frame target.
  for (int t = 0; t <= last; ++t) {
    const RigidTransform tf = g.camera_poses[t].inverse() * g.camera_poses[last];
    EXPECT_LT((apply_transform(tf, g.clip.frames[last].target_gt) -
               g.clip.frames[t].target_gt)
                  .norm(),
              1e-9);
  }
}

TEST(GenerateClipTest, HandSettlesAtTheEnd) {
  const auto cfg = small_world();
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const Clip clip = generate_clip(cfg, seed);
    double max_step = 0.0;
    std::vector<double> steps;
    for (int t = 1; t < clip.length(); ++t) {
      // The tip is recomputed from targets only where the hand is present.
      const auto& a = clip.frames[t - 1].landmarks;
      const auto& b = clip.frames[t].landmarks;
      const double step =
          a.present && b.present ? (b.fingertip() - a.fingertip()).norm() : 0.0;
      steps.push_back(step);
      max_step = std::max(max_step, step);
    }
    const int tail = std::max(1, static_cast<int>(std::ceil(0.1 * clip.length())));
    for (int i = static_cast<int>(steps.size()) - tail + 1; i < static_cast<int>(steps.size());
         ++i) {
      EXPECT_LT(steps[i], max_step) << "seed " << seed;
    }
  }
}

TEST(GenerateClipTest, LeadingFramesMayLackTheHand) {
  auto cfg = small_world();
  cfg.absent_fraction = 0.5;
  bool saw_absent = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Clip clip = generate_clip(cfg, seed);
    clip.split = Split::kVal;  // uncapped length
    clip.validate();
    bool seen_present = false;
    for (const Frame& f : clip.frames) {
      if (f.landmarks.present) seen_present = true;
      if (!f.landmarks.present) {
        saw_absent = true;
        for (const auto& p : f.landmarks.points) EXPECT_TRUE(p.isZero(0.0));
      }
    }
    EXPECT_TRUE(seen_present);
  }
  EXPECT_TRUE(saw_absent);
}

TEST(GenerateClipTest, LengthDistributionMatchesConfig) {
  const auto cfg = small_world();
  double sum = 0.0;
  int lo = 1000;
  int hi = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const int len = sample_clip_length(cfg, static_cast<std::uint64_t>(i));
    sum += len;
    lo = std::min(lo, len);
    hi = std::max(hi, len);
  }
  EXPECT_GE(lo, 8);
  EXPECT_LE(hi, cfg.clip_length_max);
  EXPECT_NEAR(sum / n, 24.0, 3.0);
}

TEST(GenerateClipTest, ImpossibleConfigFails) {
  auto cfg = small_world();
  // Targets behind the workspace box can never be accepted.
  cfg.target_min = {0.0, 0.0, 3.0};
  cfg.target_max = {0.0, 0.0, 3.5};
  cfg.max_retries = 5;
  EXPECT_THROW(generate_clip(cfg, 0), GenerationFailed);
}

TEST(GenerateClipTest, InvalidConfigNamesField) {
  auto cfg = small_world();
  cfg.peak_speed = -1.0;
  try {
    generate_clip(cfg, 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "peak_speed");
  }
}

std::vector<Clip> tiny_clips(int n, int scenes) {
  std::vector<Clip> out;
  for (int i = 0; i < n; ++i) {
    Clip c = testing::random_clip({2, 2, 3}, 30, static_cast<std::uint64_t>(i));
    c.id = "c" + std::to_string(100 + i);
    c.scene_id = i % scenes;
    out.push_back(std::move(c));
  }
  return out;
}

TEST(SplitDatasetTest, TenClipsEightyTenTen) {
  const auto s = split_dataset(tiny_clips(10, 2), {0.8, 0.1, 0.1, 0.0}, 1);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test_seen.size(), 1u);
  EXPECT_EQ(s.test_unseen.size(), 0u);
}

TEST(SplitDatasetTest, DeterministicAndCapped) {
  const auto a = split_dataset(tiny_clips(40, 4), {0.6, 0.1, 0.1, 0.2}, 7);
  const auto b = split_dataset(tiny_clips(40, 4), {0.6, 0.1, 0.1, 0.2}, 7);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].id, b.train[i].id);
  for (const Clip& c : a.train) {
    EXPECT_LE(c.length(), kTrainClipCap);
    EXPECT_EQ(c.split, Split::kTrain);
  }
  for (const Clip& c : a.val) EXPECT_EQ(c.length(), 30);
}

TEST(SplitDatasetTest, CapKeepsTrailingFrames) {
  Clip c = testing::random_clip({2, 2, 3}, 30, 3);
  const Clip capped = cap_clip(c, 25);
  ASSERT_EQ(capped.length(), 25);
  EXPECT_EQ(capped.frames.front().target_gt, c.frames[5].target_gt);
  EXPECT_EQ(capped.frames.back().target_gt, c.frames.back().target_gt);
}

TEST(SplitDatasetTest, UnseenScenesAreDisjoint) {
  const auto s = split_dataset(tiny_clips(40, 5), {0.6, 0.1, 0.1, 0.2}, 3);
  std::set<int> unseen;
  for (const Clip& c : s.test_unseen) unseen.insert(c.scene_id);
  EXPECT_FALSE(unseen.empty());
  for (const auto* part : {&s.train, &s.val, &s.test_seen}) {
    for (const Clip& c : *part) EXPECT_EQ(unseen.count(c.scene_id), 0u);
  }
  EXPECT_EQ(s.train.size() + s.val.size() + s.test_seen.size() + s.test_unseen.size(), 40u);
}

TEST(SplitDatasetTest, Errors) {
  EXPECT_THROW(split_dataset(tiny_clips(10, 2), {0.5, 0.1, 0.1, 0.0}, 0), SplitError);
  EXPECT_THROW(split_dataset(tiny_clips(2, 1), {0.5, 0.25, 0.25, 0.0}, 0), SplitError);
  // A single scene cannot supply both seen and unseen clips.
  EXPECT_THROW(split_dataset(tiny_clips(10, 1), {0.6, 0.1, 0.1, 0.2}, 0), SplitError);
}

TEST(ClipIoTest, RoundTripsGeneratedClip) {
  const auto dir = temp_dir("clip_roundtrip");
  Clip clip = generate_clip(small_world(), 17);
  clip.split = Split::kTestUnseen;
  save_clip(clip, dir / "clip");
  expect_clips_equal(clip, load_clip(dir / "clip"));
}

TEST(ClipIoTest, RoundTripsDataset) {
  const auto dir = temp_dir("dataset_roundtrip");
  std::vector<Clip> clips;
  for (int i = 0; i < 3; ++i) {
    clips.push_back(generate_clip(small_world(8), i));
    clips.back().split = Split::kTestSeen;
  }
  save_dataset(clips, dir);
  const auto loaded = load_dataset(dir);
  ASSERT_EQ(loaded.size(), 3u);
  std::map<std::string, const Clip*> by_id;
  for (const Clip& c : loaded) by_id[c.id] = &c;
  for (const Clip& c : clips) expect_clips_equal(c, *by_id.at(c.id));
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

TEST(ClipIoTest, TruncatedVisualIsFormatError) {
  const auto dir = temp_dir("truncated");
  save_clip(generate_clip(small_world(8), 1), dir);
  const std::string v = read_all(dir / "visual.npy");
  write_all(dir / "visual.npy", v.substr(0, v.size() / 2));
  try {
    load_clip(dir);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "visual");
  }
}

TEST(ClipIoTest, TwentyLandmarksNamesLandmarks) {
  const auto dir = temp_dir("twenty");
  save_clip(generate_clip(small_world(8), 1), dir);
  std::istringstream in(read_all(dir / "landmarks.csv"));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    // Drop the last (x, y) pair from every row.
    for (int k = 0; k < 2; ++k) line = line.substr(0, line.rfind(','));
    out << line << '\n';
  }
  write_all(dir / "landmarks.csv", out.str());
  try {
    load_clip(dir);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "landmarks");
  }
}

TEST(ClipIoTest, MissingDirectoryIsFormatError) {
  EXPECT_THROW(load_clip(temp_dir("missing") / "nope"), FormatError);
}

TEST(GenerateDatasetTest, DeterministicSplits) {
  GenerateConfig cfg;
  cfg.world = small_world(8, 4);
  cfg.num_clips = 20;
  cfg.num_scenes = 4;
  cfg.ratios = {0.6, 0.1, 0.1, 0.2};
  const auto a = generate_dataset(cfg);
  const auto b = generate_dataset(cfg);
  ASSERT_EQ(a.test_unseen.size(), b.test_unseen.size());
  for (std::size_t i = 0; i < a.test_unseen.size(); ++i) {
    expect_clips_equal(a.test_unseen[i], b.test_unseen[i]);
  }
}

}  // namespace
}  // namespace egotarget
