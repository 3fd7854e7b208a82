#pragma once

#include "skelimg/topology.hpp"
#include "skelimg/types.hpp"

#include <array>
#include <vector>

namespace skelimg {

// First two columns (a1, a2) of a rotation matrix, stored a1x a1y a1z a2x a2y
// a2z. Construction rejects inputs Gram-Schmidt cannot orthonormalize.
class Rotation6D
{
 public:
   static constexpr double k_degenerate_tol = 1e-9;

   Rotation6D() noexcept : v_{1.0, 0.0, 0.0, 0.0, 1.0, 0.0} {}
   explicit Rotation6D(const std::array<double, 6>& v);
   Rotation6D(const Vec3& a1, const Vec3& a2);

   const std::array<double, 6>& values() const noexcept { return v_; }
   double operator[](int i) const noexcept { return v_[size_t(i)]; }
   Vec3 a1() const noexcept { return {v_[0], v_[1], v_[2]}; }
   Vec3 a2() const noexcept { return {v_[3], v_[4], v_[5]}; }

   friend bool operator==(const Rotation6D&, const Rotation6D&) = default;

 private:
   std::array<double, 6> v_;
};

/// Keypoints in normalized image coordinates: x in units of image width, y in
/// units of image height, origin top-left.
struct Pose2D
{
   std::vector<Vec2> keypoints;

   int size() const noexcept { return int(keypoints.size()); }
   friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Camera-space joint positions in meters (Z forward, Y down) and per-joint
/// global orientations.
struct Pose3D
{
   std::vector<Vec3> positions;
   std::vector<Rotation6D> orientations;

   int size() const noexcept { return int(positions.size()); }
   friend bool operator==(const Pose3D&, const Pose3D&) = default;
};

// Throw ValidationError unless the pose matches `topo` and is finite.
void check_pose(const Pose2D& pose, const SkeletonTopology& topo);
void check_pose(const Pose3D& pose, const SkeletonTopology& topo);

// Label swap: keypoint k takes the coordinates of keypoint flip_map[k].
// No geometric mirroring happens.
Pose2D flip_pose(const Pose2D& pose, const SkeletonTopology& topo);
Pose3D flip_pose(const Pose3D& pose, const SkeletonTopology& topo);

} // namespace skelimg
