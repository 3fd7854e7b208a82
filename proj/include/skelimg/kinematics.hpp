#pragma once

#include "skelimg/pose.hpp"
#include "skelimg/topology.hpp"

#include <vector>

namespace skelimg {

/// Bone offsets from each joint's parent in the rest pose (root entry unused).
struct RestOffsets
{
   std::vector<Vec3> offsets;
};

// Rest pose matching default_human_topology(), meters, camera axes (Y down),
// subject facing the camera.
const RestOffsets& default_human_rest();

RestOffsets rest_offsets_from_pose(const Pose3D& pose, const SkeletonTopology& topo);

// rotations[k] is joint k's local rotation; it turns the offsets of k's
// children. Returned orientations are the accumulated global rotations.
Pose3D forward_kinematics(const SkeletonTopology& topo, const RestOffsets& rest,
                          const std::vector<Rotation6D>& rotations,
                          const Vec3& root_position);

/// Length of the bone ending at each joint (0 for the root).
std::vector<double> bone_lengths(const Pose3D& pose, const SkeletonTopology& topo);

} // namespace skelimg
