#include "skelimg/camera.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace skelimg {

namespace {
constexpr double k_min_depth = 1e-6;
}

double PerspectiveCamera::focal() const
{
   return 0.5 / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
}

void check_camera(const PerspectiveCamera& cam)
{
   if(!(cam.fov_deg > 0.0 && cam.fov_deg < 180.0))
      throw ValidationError(fmt::format("camera fov_deg must be in (0, 180), got {}",
                                        cam.fov_deg));
   if(cam.width < 1 || cam.height < 1)
      throw ValidationError(fmt::format("camera size must be positive, got {}x{}",
                                        cam.width, cam.height));
}

Vec2 project_point(const Vec3& p, const PerspectiveCamera& cam)
{
   const double f = cam.focal();
   return {0.5 + f * (p.x() / p.z()), 0.5 + f * cam.aspect() * (p.y() / p.z())};
}

ProjectionJacobian project_jacobian(const Vec3& p, const PerspectiveCamera& cam)
{
   const double fx = cam.focal();
   const double fy = fx * cam.aspect();
   const double iz = 1.0 / p.z();
   ProjectionJacobian J;
   J << fx * iz, 0.0, -fx * p.x() * iz * iz, //
       0.0, fy * iz, -fy * p.y() * iz * iz;
   return J;
}

Pose2D project(const Pose3D& pose, const PerspectiveCamera& cam)
{
   check_camera(cam);
   Pose2D out;
   out.keypoints.reserve(pose.positions.size());
   for(size_t k = 0; k < pose.positions.size(); ++k) {
      const Vec3& p = pose.positions[k];
      if(!p.allFinite())
         throw ValidationError(fmt::format("project: joint {} is not finite", k));
      if(!(p.z() > k_min_depth))
         throw ValidationError(fmt::format(
             "project: joint {} has depth {} (must be > {})", k, p.z(), k_min_depth));
      out.keypoints.push_back(project_point(p, cam));
   }
   return out;
}

} // namespace skelimg
