#include "skelimg/kinematics.hpp"

#include "skelimg/errors.hpp"
#include "skelimg/rotation.hpp"

#include <fmt/format.h>

namespace skelimg {

const RestOffsets& default_human_rest()
{
   // joint order of default_human_topology(); x right, y down, z away from
   // the camera. Knees and elbows are flexed.
   static const RestOffsets rest{{
       {0.0, 0.0, 0.0},       // pelvis
       {-0.12, 0.02, 0.0},    // right_hip
       {-0.12, 0.42, 0.0},    // right_knee
       {0.08, 0.42, 0.0},     // right_ankle
       {0.12, 0.02, 0.0},     // left_hip
       {0.12, 0.42, 0.0},     // left_knee
       {-0.08, 0.42, 0.0},    // left_ankle
       {0.0, -0.24, 0.0},     // spine
       {0.0, -0.26, 0.0},     // thorax
       {0.0, -0.10, -0.02},   // neck
       {0.0, -0.13, 0.0},     // head
       {0.17, 0.02, 0.0},     // left_shoulder
       {0.14, 0.24, 0.0},     // left_elbow
       {-0.20, 0.12, -0.05},  // left_wrist
       {-0.17, 0.02, 0.0},    // right_shoulder
       {-0.14, 0.24, 0.0},    // right_elbow
       {0.20, 0.12, -0.05},   // right_wrist
   }};
   return rest;
}

RestOffsets rest_offsets_from_pose(const Pose3D& pose, const SkeletonTopology& topo)
{
   if(pose.size() != topo.joint_count())
      throw ValidationError("rest pose does not match topology");
   RestOffsets out;
   out.offsets.assign(pose.positions.size(), Vec3::Zero());
   for(int k = 0; k < topo.joint_count(); ++k)
      if(const auto& p = topo.parents[size_t(k)])
         out.offsets[size_t(k)] = pose.positions[size_t(k)] - pose.positions[size_t(*p)];
   return out;
}

Pose3D forward_kinematics(const SkeletonTopology& topo, const RestOffsets& rest,
                          const std::vector<Rotation6D>& rotations,
                          const Vec3& root_position)
{
   const int root = tree_root(topo);
   const auto order = topological_order(topo);
   const auto n = size_t(topo.joint_count());
   if(rest.offsets.size() != n || rotations.size() != n)
      throw ValidationError(fmt::format(
          "forward_kinematics: {} offsets / {} rotations for {} joints",
          rest.offsets.size(), rotations.size(), n));

   std::vector<Mat3> global(n);
   Pose3D out;
   out.positions.assign(n, Vec3::Zero());
   out.orientations.resize(n);
   for(int k : order) {
      const Mat3 local = rot6d_to_matrix(rotations[size_t(k)]);
      if(k == root) {
         global[size_t(k)] = local;
         out.positions[size_t(k)] = root_position;
      } else {
         const auto p = size_t(*topo.parents[size_t(k)]);
         out.positions[size_t(k)]
             = out.positions[p] + global[p] * rest.offsets[size_t(k)];
         global[size_t(k)] = global[p] * local;
      }
      out.orientations[size_t(k)] = Rotation6D(Vec3(global[size_t(k)].col(0)),
                                               Vec3(global[size_t(k)].col(1)));
   }
   return out;
}

std::vector<double> bone_lengths(const Pose3D& pose, const SkeletonTopology& topo)
{
   if(pose.size() != topo.joint_count())
      throw ValidationError("bone_lengths: pose does not match topology");
   std::vector<double> out(pose.positions.size(), 0.0);
   for(int k = 0; k < topo.joint_count(); ++k)
      if(const auto& p = topo.parents[size_t(k)])
         out[size_t(k)] = (pose.positions[size_t(k)] - pose.positions[size_t(*p)]).norm();
   return out;
}

} // namespace skelimg
