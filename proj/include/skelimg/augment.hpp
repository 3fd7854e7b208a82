#pragma once

#include "skelimg/pose.hpp"
#include "skelimg/rng.hpp"
#include "skelimg/topology.hpp"

#include <array>
#include <cstdint>

namespace skelimg {

struct AugmentConfig
{
   std::array<double, 2> crop_scale_range = {0.7, 1.3};
   double crop_offset_range = 0.15;
   std::array<double, 2> limb_scale_range = {0.8, 1.2};
   uint64_t seed = 0;
};

void check_augment(const AugmentConfig& cfg);

// Scales every bone by a uniform sample from limb_scale_range. Bones swapped
// by the flip map share one sample; descendants move rigidly with their bone.
Pose3D randomize_limb_lengths(const Pose3D& pose, const SkeletonTopology& topo,
                              const AugmentConfig& cfg, SplitMix64& rng);

struct CropTransform
{
   double scale = 1.0;
   Vec2 offset = Vec2::Zero();

   /// p' = scale * (p - c) + c + offset, c = (0.5, 0.5)
   Pose2D apply(const Pose2D& pose) const;
   Pose2D invert(const Pose2D& pose) const;
};

struct CropResult
{
   Pose2D pose;
   CropTransform transform;
};

CropResult random_crop_transform(const Pose2D& pose, const AugmentConfig& cfg,
                                 SplitMix64& rng);

} // namespace skelimg
