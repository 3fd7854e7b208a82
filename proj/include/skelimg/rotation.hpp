#pragma once

#include "skelimg/pose.hpp"
#include "skelimg/types.hpp"

namespace skelimg {

/// Gram-Schmidt decode: columns b1, b2, b1 x b2.
Mat3 rot6d_to_matrix(const Rotation6D& r);

/// First two columns of R. Throws ValidationError unless R is orthonormal
/// within 1e-6 with det +1.
Rotation6D matrix_to_rot6d(const Mat3& R);

Mat3 axis_angle_matrix(const Vec3& axis, double angle_rad);

} // namespace skelimg
