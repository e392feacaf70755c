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

#include "egotarget/geometry.hpp"

#include <cmath>
#include <string>

#include "egotarget/error.hpp"

namespace egotarget {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw DomainError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw DomainError("intrinsics: resolution must be positive");
  }
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw DomainError("intrinsics: principal point outside the image");
  }
}

RigidTransform RigidTransform::from_axis_angle(
    const Eigen::Vector3d& axis_angle, const Eigen::Vector3d& translation) {
  RigidTransform tf;
  const double angle = axis_angle.norm();
  if (angle > 0.0) {
    tf.rotation =
        Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
  }
  tf.translation = translation;
  return tf;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol &&
         translation.allFinite();
}

NormalizedCoord::NormalizedCoord(double value) : value_(value) {
  if (!(value >= -1.0 && value <= 1.0)) {
    throw DomainError("normalized coordinate out of [-1, 1]: " +
                      std::to_string(value));
  }
}

void WorkspaceBox::validate() const {
  if (!((max - min).array() > 0.0).all()) {
    throw DomainError("workspace box must have positive extent on every axis");
  }
}

Eigen::Vector3d WorkspaceBox::to_normalized(
    const Eigen::Vector3d& meters) const {
  return (2.0 * (meters - min).array() / (max - min).array() - 1.0).matrix();
}

Eigen::Vector3d WorkspaceBox::to_meters(
    const Eigen::Vector3d& normalized) const {
  return (min.array() + (normalized.array() + 1.0) * 0.5 * (max - min).array())
      .matrix();
}

Eigen::Vector2d project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& k) {
  if (!(point.z() > 0.0)) {
    throw DegenerateProjection("project: point depth must be positive");
  }
  return {k.fx * point.x() / point.z() + k.cx,
          k.fy * point.y() / point.z() + k.cy};
}

Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const CameraIntrinsics& k) {
  if (!(depth > 0.0)) {
    throw DegenerateProjection("unproject: depth must be positive");
  }
  return {(pixel.x() - k.cx) * depth / k.fx, (pixel.y() - k.cy) * depth / k.fy,
          depth};
}

Eigen::Vector3d apply_transform(const RigidTransform& tf,
                                const Eigen::Vector3d& point) {
  return tf.rotation * point + tf.translation;
}

}  // namespace egotarget
