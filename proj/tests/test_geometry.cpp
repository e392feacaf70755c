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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "egotarget/error.hpp"
#include "egotarget/geometry.hpp"

namespace egotarget {
namespace {

CameraIntrinsics hd_camera() {
  CameraIntrinsics k;
  k.fx = 1000.0;
  k.fy = 1000.0;
  k.cx = 960.0;
  k.cy = 540.0;
  k.width = 1920;
  k.height = 1080;
  return k;
}

TEST(ProjectTest, OpticalAxisHitsPrincipalPoint) {
  const Eigen::Vector2d px = project({0.0, 0.0, 1.0}, hd_camera());
  EXPECT_DOUBLE_EQ(px.x(), 960.0);
  EXPECT_DOUBLE_EQ(px.y(), 540.0);
}

TEST(ProjectTest, LateralOffset) {
  const Eigen::Vector2d px = project({0.1, 0.0, 1.0}, hd_camera());
  EXPECT_NEAR(px.x(), 1060.0, 1e-9);
  EXPECT_NEAR(px.y(), 540.0, 1e-9);
}

TEST(ProjectTest, HandComputedOracle) {
  // 1000 * 0.3 / 0.8 + 960 = 1335; 1000 * -0.2 / 0.8 + 540 = 290.
  const Eigen::Vector2d px = project({0.3, -0.2, 0.8}, hd_camera());
  EXPECT_NEAR(px.x(), 1335.0, 1e-9);
  EXPECT_NEAR(px.y(), 290.0, 1e-9);
}

TEST(ProjectTest, NonPositiveDepthThrows) {
  EXPECT_THROW(project({0.0, 0.0, 0.0}, hd_camera()), DegenerateProjection);
  EXPECT_THROW(project({0.1, 0.0, -1.0}, hd_camera()), DegenerateProjection);
}

TEST(UnprojectTest, PrincipalPoint) {
  const Eigen::Vector3d p = unproject({960.0, 540.0}, 1.0, hd_camera());
  EXPECT_NEAR((p - Eigen::Vector3d(0, 0, 1)).norm(), 0.0, 1e-12);
}

TEST(UnprojectTest, ArithmeticOracle) {
  // (1060 - 960) * 2 / 1000 = 0.2.
  const Eigen::Vector3d p = unproject({1060.0, 540.0}, 2.0, hd_camera());
  EXPECT_NEAR(p.x(), 0.2, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
  EXPECT_EQ(p.z(), 2.0);
}

TEST(UnprojectTest, NonPositiveDepthThrows) {
  EXPECT_THROW(unproject({1.0, 1.0}, 0.0, hd_camera()), DegenerateProjection);
}

TEST(UnprojectTest, RoundTrips) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> depth(0.2, 2.0);
  const CameraIntrinsics k;  // 4K default
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d q(u(rng), u(rng), depth(rng));
    EXPECT_LT((unproject(project(q, k), q.z(), k) - q).norm(), 1e-9);
    const Eigen::Vector2d px(3840.0 * (u(rng) + 1.0) / 2.0, 2160.0 * (u(rng) + 1.0) / 2.0);
    EXPECT_LT((project(unproject(px, q.z(), k), k) - px).norm(), 1e-9);
  }
}

TEST(IntrinsicsTest, ValidateRejectsBadValues) {
  CameraIntrinsics k;
  EXPECT_NO_THROW(k.validate());
  k.fx = 0.0;
  EXPECT_THROW(k.validate(), DomainError);
  k = CameraIntrinsics{};
  k.cx = k.width;
  EXPECT_THROW(k.validate(), DomainError);
  k = CameraIntrinsics{};
  k.cy = 0.0;
  EXPECT_THROW(k.validate(), DomainError);
}

TEST(TransformTest, IdentityIsFixedPoint) {
  const Eigen::Vector3d p(1, 2, 3);
  EXPECT_EQ(apply_transform(RigidTransform::identity(), p), p);
}

TEST(TransformTest, PureTranslation) {
  RigidTransform tf;
  tf.translation = {0.1, 0.0, 0.0};
  EXPECT_EQ(apply_transform(tf, Eigen::Vector3d::Zero()), Eigen::Vector3d(0.1, 0, 0));
}

TEST(TransformTest, QuarterTurnAboutZ) {
  const auto tf = RigidTransform::from_axis_angle({0, 0, std::numbers::pi / 2},
                                                  Eigen::Vector3d::Zero());
  EXPECT_LT((apply_transform(tf, {1, 0, 0}) - Eigen::Vector3d(0, 1, 0)).norm(), 1e-9);
}

TEST(TransformTest, PreservesDistancesAndComposes) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto a = RigidTransform::from_axis_angle({g(rng), g(rng), g(rng)},
                                                   {g(rng), g(rng), g(rng)});
    const auto b = RigidTransform::from_axis_angle({g(rng), g(rng), g(rng)},
                                                   {g(rng), g(rng), g(rng)});
    const Eigen::Vector3d p(g(rng), g(rng), g(rng));
    const Eigen::Vector3d q(g(rng), g(rng), g(rng));
    EXPECT_TRUE(a.is_valid(1e-6));
    EXPECT_NEAR((apply_transform(a, p) - apply_transform(a, q)).norm(), (p - q).norm(),
                1e-9);
    EXPECT_LT((apply_transform(a * b, p) - apply_transform(a, apply_transform(b, p))).norm(),
              1e-9);
    EXPECT_LT((apply_transform(a.inverse(), apply_transform(a, p)) - p).norm(), 1e-9);
  }
}

TEST(NormalizedCoordTest, RejectsOutOfRange) {
  EXPECT_NO_THROW(NormalizedCoord(-1.0));
  EXPECT_NO_THROW(NormalizedCoord(1.0));
  EXPECT_THROW(NormalizedCoord(1.0000001), DomainError);
  EXPECT_THROW(NormalizedCoord(std::nan("")), DomainError);
}

TEST(WorkspaceBoxTest, DefaultMapsCornersAndCenter) {
  const WorkspaceBox box;
  EXPECT_EQ(box.to_normalized({-1.0, -1.0, 0.0}), Eigen::Vector3d(-1, -1, -1));
  EXPECT_EQ(box.to_normalized({1.0, 1.0, 2.0}), Eigen::Vector3d(1, 1, 1));
  EXPECT_EQ(box.to_normalized({0.0, 0.0, 1.0}), Eigen::Vector3d(0, 0, 0));
  const Eigen::Vector3d m(0.3, -0.2, 0.7);
  EXPECT_LT((box.to_meters(box.to_normalized(m)) - m).norm(), 1e-15);
}

TEST(WorkspaceBoxTest, RejectsEmptyBox) {
  WorkspaceBox box;
  box.max.x() = box.min.x();
  EXPECT_THROW(box.validate(), DomainError);
}

}  // namespace
}  // namespace egotarget
