#include "skelimg/augment.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

namespace skelimg {

void check_augment(const AugmentConfig& cfg)
{
   const auto check_range = [](const char* name, const std::array<double, 2>& r) {
      if(!(r[0] > 0.0 && r[0] <= r[1]))
         throw ValidationError(
             fmt::format("augment {}: need 0 < lo <= hi, got [{}, {}]", name, r[0], r[1]));
   };
   check_range("crop_scale_range", cfg.crop_scale_range);
   check_range("limb_scale_range", cfg.limb_scale_range);
   if(!(cfg.crop_offset_range >= 0.0))
      throw ValidationError(fmt::format("augment crop_offset_range must be >= 0, got {}",
                                        cfg.crop_offset_range));
}

Pose3D randomize_limb_lengths(const Pose3D& pose, const SkeletonTopology& topo,
                              const AugmentConfig& cfg, SplitMix64& rng)
{
   check_augment(cfg);
   const auto order = topological_order(topo);
   const auto n = size_t(topo.joint_count());
   if(pose.positions.size() != n)
      throw ValidationError("randomize_limb_lengths: pose does not match topology");
   const bool has_flip = topo.flip_map.size() == n;

   std::vector<double> scale(n, 1.0);
   std::vector<bool> sampled(n, false);
   for(size_t k = 0; k < n; ++k) {
      if(!topo.parents[k]) continue;
      const auto partner = has_flip ? size_t(topo.flip_map[k]) : k;
      if(partner < k && sampled[partner]) {
         scale[k] = scale[partner];
      } else {
         scale[k] = rng.uniform(cfg.limb_scale_range[0], cfg.limb_scale_range[1]);
      }
      sampled[k] = true;
   }

   Pose3D out = pose;
   for(int k : order) {
      const auto& p = topo.parents[size_t(k)];
      if(!p) continue;
      const Vec3 bone = pose.positions[size_t(k)] - pose.positions[size_t(*p)];
      out.positions[size_t(k)] = out.positions[size_t(*p)] + scale[size_t(k)] * bone;
   }
   return out;
}

Pose2D CropTransform::apply(const Pose2D& pose) const
{
   const Vec2 c(0.5, 0.5);
   Pose2D out;
   out.keypoints.reserve(pose.keypoints.size());
   for(const auto& p : pose.keypoints) out.keypoints.push_back(scale * (p - c) + c + offset);
   return out;
}

Pose2D CropTransform::invert(const Pose2D& pose) const
{
   const Vec2 c(0.5, 0.5);
   Pose2D out;
   out.keypoints.reserve(pose.keypoints.size());
   for(const auto& p : pose.keypoints) out.keypoints.push_back((p - c - offset) / scale + c);
   return out;
}

CropResult random_crop_transform(const Pose2D& pose, const AugmentConfig& cfg,
                                 SplitMix64& rng)
{
   check_augment(cfg);
   CropTransform tf;
   tf.scale = rng.uniform(cfg.crop_scale_range[0], cfg.crop_scale_range[1]);
   tf.offset.x() = rng.uniform(-cfg.crop_offset_range, cfg.crop_offset_range);
   tf.offset.y() = rng.uniform(-cfg.crop_offset_range, cfg.crop_offset_range);
   return {tf.apply(pose), tf};
}

} // namespace skelimg
