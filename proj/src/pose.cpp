#include "skelimg/pose.hpp"

#include "skelimg/errors.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <cmath>

namespace skelimg {

Rotation6D::Rotation6D(const std::array<double, 6>& v)
    : v_(v)
{
   for(double x : v_)
      if(!std::isfinite(x)) throw ValidationError("rot6d: non-finite entry");
   const Vec3 u = a1();
   const Vec3 w = a2();
   const double n1 = u.norm();
   if(n1 < k_degenerate_tol)
      throw ValidationError(fmt::format("rot6d: first vector has norm {} < {}", n1,
                                        k_degenerate_tol));
   const double n2 = w.norm();
   if(n2 < k_degenerate_tol || u.cross(w).norm() / (n1 * n2) < k_degenerate_tol)
      throw ValidationError("rot6d: second vector is zero or parallel to the first");
}

Rotation6D::Rotation6D(const Vec3& a1, const Vec3& a2)
    : Rotation6D(std::array<double, 6>{a1.x(), a1.y(), a1.z(), a2.x(), a2.y(), a2.z()})
{}

void check_pose(const Pose2D& pose, const SkeletonTopology& topo)
{
   if(pose.size() != topo.joint_count())
      throw ValidationError(fmt::format("pose has {} keypoints, topology has {} joints",
                                        pose.size(), topo.joint_count()));
   for(int k = 0; k < pose.size(); ++k)
      if(!pose.keypoints[size_t(k)].allFinite())
         throw ValidationError(fmt::format("keypoint {} ({}) is not finite", k,
                                           topo.joints[size_t(k)]));
}

void check_pose(const Pose3D& pose, const SkeletonTopology& topo)
{
   if(pose.size() != topo.joint_count()
      || int(pose.orientations.size()) != topo.joint_count())
      throw ValidationError(fmt::format(
          "3D pose has {} positions / {} orientations, topology has {} joints",
          pose.positions.size(), pose.orientations.size(), topo.joint_count()));
   for(int k = 0; k < pose.size(); ++k)
      if(!pose.positions[size_t(k)].allFinite())
         throw ValidationError(fmt::format("joint {} ({}) position is not finite", k,
                                           topo.joints[size_t(k)]));
}

Pose2D flip_pose(const Pose2D& pose, const SkeletonTopology& topo)
{
   if(pose.size() != int(topo.flip_map.size()))
      throw ValidationError(fmt::format("flip_pose: pose has {} keypoints, flip map {}",
                                        pose.size(), topo.flip_map.size()));
   Pose2D out;
   out.keypoints.reserve(pose.keypoints.size());
   for(int f : topo.flip_map) out.keypoints.push_back(pose.keypoints[size_t(f)]);
   return out;
}

Pose3D flip_pose(const Pose3D& pose, const SkeletonTopology& topo)
{
   if(pose.size() != int(topo.flip_map.size())
      || pose.orientations.size() != pose.positions.size())
      throw ValidationError("flip_pose: 3D pose does not match flip map");
   Pose3D out;
   for(int f : topo.flip_map) {
      out.positions.push_back(pose.positions[size_t(f)]);
      out.orientations.push_back(pose.orientations[size_t(f)]);
   }
   return out;
}

} // namespace skelimg
