#pragma once

#include "skelimg/pose.hpp"
#include "skelimg/topology.hpp"
#include "skelimg/types.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skelimg {

struct RenderParams
{
   double gamma = 250.0; // 1 / (normalized distance)^2
   int width = 128;
   int height = 128;
};

void check_params(const RenderParams& params);

// C planes of height x width values, planar and row-major within each plane.
class SkeletonImage
{
 public:
   SkeletonImage() = default;
   SkeletonImage(int channels, int width, int height, std::string layout = {});

   int channels() const noexcept { return channels_; }
   int width() const noexcept { return width_; }
   int height() const noexcept { return height_; }
   const std::string& layout() const noexcept { return layout_; }
   void set_layout(std::string layout) { layout_ = std::move(layout); }

   size_t size() const noexcept { return data_.size(); }
   size_t plane_size() const noexcept { return size_t(width_) * size_t(height_); }

   double& at(int c, int row, int col) noexcept { return data_[index(c, row, col)]; }
   double at(int c, int row, int col) const noexcept { return data_[index(c, row, col)]; }

   std::span<double> plane(int c) noexcept
   {
      return {data_.data() + size_t(c) * plane_size(), plane_size()};
   }
   std::span<const double> plane(int c) const noexcept
   {
      return {data_.data() + size_t(c) * plane_size(), plane_size()};
   }
   std::span<double> values() noexcept { return data_; }
   std::span<const double> values() const noexcept { return data_; }

   bool same_shape(const SkeletonImage& o) const noexcept
   {
      return channels_ == o.channels_ && width_ == o.width_ && height_ == o.height_;
   }

   friend bool operator==(const SkeletonImage&, const SkeletonImage&) = default;

 private:
   size_t index(int c, int row, int col) const noexcept
   {
      return (size_t(c) * size_t(height_) + size_t(row)) * size_t(width_) + size_t(col);
   }

   int channels_ = 0;
   int width_ = 0;
   int height_ = 0;
   std::string layout_;
   std::vector<double> data_;
};

/// Normalized coordinates of the center of pixel (row, col).
inline Vec2 pixel_center(int row, int col, int width, int height) noexcept
{
   return {(col + 0.5) / width, (row + 0.5) / height};
}

struct SegmentDistance
{
   double d2 = 0.0; // squared distance to the closest point
   double t = 0.0;  // its parameter along a -> b, in [0, 1]
};

inline SegmentDistance point_segment_sq_distance(const Vec2& u, const Vec2& a,
                                                 const Vec2& b) noexcept
{
   const double abx = b.x() - a.x();
   const double aby = b.y() - a.y();
   const double wx = u.x() - a.x();
   const double wy = u.y() - a.y();
   const double len2 = abx * abx + aby * aby;
   double t = 0.0;
   if(len2 > 0.0) t = std::clamp((wx * abx + wy * aby) / len2, 0.0, 1.0);
   const double dx = wx - t * abx;
   const double dy = wy - t * aby;
   return {dx * dx + dy * dy, t};
}

/// Per-keypoint dL/dx, dL/dy in normalized-coordinate units.
using RenderGradient = std::vector<Vec2>;

// Pixel (c, row, col) value is exp(-gamma * d2), where d2 is the squared
// distance from the pixel center to the nearest edge assigned to channel c.
// Channels with no edges are zero.
SkeletonImage render(const Pose2D& pose, const SkeletonTopology& topo,
                     std::string_view layout, const RenderParams& params);

// Gradient of L w.r.t. the keypoints given dL/dy per pixel (same shape as the
// rendered image). Only the nearest edge of each pixel contributes, with its
// clamped t held fixed; ties go to the lowest edge index.
RenderGradient render_backward(const Pose2D& pose, const SkeletonTopology& topo,
                               std::string_view layout, const RenderParams& params,
                               std::span<const double> upstream);

struct RenderLoss
{
   double loss = 0.0;
   RenderGradient grad;
};

/// Mean squared difference between render(pose) and target, and its gradient.
RenderLoss render_loss_and_grad(const Pose2D& pose, const SkeletonImage& target,
                                const SkeletonTopology& topo, std::string_view layout,
                                const RenderParams& params);

// Nearest-edge details of one pixel, for gradient checks.
struct PixelArgmin
{
   int edge = -1;             // -1 when the channel has no edges
   double t = 0.0;
   double d2 = 0.0;
   double second_d2 = 0.0;    // +inf with a single edge in the channel
   double value = 0.0;
};

PixelArgmin pixel_argmin(const Pose2D& pose, const SkeletonTopology& topo,
                         std::string_view layout, const RenderParams& params, int channel,
                         int row, int col);

} // namespace skelimg
