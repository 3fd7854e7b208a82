#include "skelimg/rotation.hpp"

#include "skelimg/errors.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <cmath>

namespace skelimg {

Mat3 rot6d_to_matrix(const Rotation6D& r)
{
   const Vec3 b1 = r.a1().normalized();
   const Vec3 a2 = r.a2();
   const Vec3 b2 = (a2 - b1.dot(a2) * b1).normalized();
   Mat3 R;
   R.col(0) = b1;
   R.col(1) = b2;
   R.col(2) = b1.cross(b2);
   return R;
}

Rotation6D matrix_to_rot6d(const Mat3& R)
{
   if(!R.allFinite()) throw ValidationError("matrix_to_rot6d: non-finite matrix");
   const double ortho_err = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
   const double det = R.determinant();
   if(ortho_err > 1e-6 || std::abs(det - 1.0) > 1e-6)
      throw ValidationError(fmt::format(
          "matrix_to_rot6d: not a rotation (orthonormality error {:g}, det {:g})",
          ortho_err, det));
   return Rotation6D(Vec3(R.col(0)), Vec3(R.col(1)));
}

Mat3 axis_angle_matrix(const Vec3& axis, double angle_rad)
{
   const double n = axis.norm();
   if(n == 0.0 || angle_rad == 0.0) return Mat3::Identity();
   return Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix();
}

} // namespace skelimg
