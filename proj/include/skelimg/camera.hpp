#pragma once

#include "skelimg/pose.hpp"
#include "skelimg/types.hpp"

#include <Eigen/Core>

namespace skelimg {

// Pinhole camera with the principal point at the image center and square
// pixels. x is normalized by width, y by height.
struct PerspectiveCamera
{
   double fov_deg = 62.0; // horizontal
   int width = 128;
   int height = 128;

   /// Focal length in units of image width.
   double focal() const;
   double aspect() const noexcept { return double(width) / double(height); }
};

void check_camera(const PerspectiveCamera& cam);

using ProjectionJacobian = Eigen::Matrix<double, 2, 3>;

Vec2 project_point(const Vec3& p, const PerspectiveCamera& cam);
ProjectionJacobian project_jacobian(const Vec3& p, const PerspectiveCamera& cam);

// Throws ValidationError naming the joint if any Z <= 1e-6.
Pose2D project(const Pose3D& pose, const PerspectiveCamera& cam);

} // namespace skelimg
