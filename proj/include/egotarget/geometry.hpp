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

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace egotarget {

/// Pinhole intrinsics with zero distortion. Pixel units throughout.
struct CameraIntrinsics {
  double fx = 1500.0;
  double fy = 1500.0;
  double cx = 1920.0;
  double cy = 1080.0;
  int width = 3840;
  int height = 2160;

  /// Throws DomainError if any invariant (positive focal lengths, principal
  /// point strictly inside the image) is violated.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Rigid motion p -> rotation * p + translation (translation in meters).
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis_angle,
                                        const Eigen::Vector3d& translation);

  /// this ∘ other: applies `other` first.
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// Orthonormality and unit determinant within `tol`.
  bool is_valid(double tol = 1e-6) const;
};

/// Scalar in normalized grid units; construction rejects values outside
/// [-1, 1] with DomainError.
class NormalizedCoord {
 public:
  explicit NormalizedCoord(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Axis-aligned box in camera coordinates (meters) mapped affinely onto the
/// normalized cube [-1, 1]^3.
struct WorkspaceBox {
  Eigen::Vector3d min{-1.0, -1.0, 0.0};
  Eigen::Vector3d max{1.0, 1.0, 2.0};

  void validate() const;
  Eigen::Vector3d to_normalized(const Eigen::Vector3d& meters) const;
  Eigen::Vector3d to_meters(const Eigen::Vector3d& normalized) const;

  bool operator==(const WorkspaceBox&) const = default;
};

/// Perspective projection to pixels, discarding depth. Throws
/// DegenerateProjection when point.z() <= 0.
Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& k);

/// Back-projection of a pixel at the given depth (meters). Throws
/// DegenerateProjection when depth <= 0.
Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const CameraIntrinsics& k);

Eigen::Vector3d apply_transform(const RigidTransform& tf,
                                const Eigen::Vector3d& point);

}  // namespace egotarget
