#include "skelimg/render.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace skelimg {

void check_params(const RenderParams& params)
{
   if(!(params.gamma > 0.0) || !std::isfinite(params.gamma))
      throw ValidationError(fmt::format("render gamma must be > 0, got {}", params.gamma));
   if(params.width < 1 || params.height < 1)
      throw ValidationError(fmt::format("render size must be positive, got {}x{}",
                                        params.width, params.height));
}

SkeletonImage::SkeletonImage(int channels, int width, int height, std::string layout)
    : channels_(channels)
    , width_(width)
    , height_(height)
    , layout_(std::move(layout))
{
   if(channels < 0 || width < 1 || height < 1)
      throw ValidationError(fmt::format("invalid image shape {}x{}x{}", channels, width,
                                        height));
   data_.assign(size_t(channels) * size_t(width) * size_t(height), 0.0);
}

namespace {

struct Segment
{
   int edge;
   Vec2 a;
   Vec2 b;
};

struct Nearest
{
   int slot = -1; // index into the channel's segment list
   double d2 = std::numeric_limits<double>::infinity();
   double t = 0.0;
};

std::vector<std::vector<Segment>> channel_segments(const Pose2D& pose,
                                                   const SkeletonTopology& topo,
                                                   std::string_view layout)
{
   check_pose(pose, topo);
   const auto groups = topo.edges_by_channel(layout);
   std::vector<std::vector<Segment>> out(groups.size());
   for(size_t c = 0; c < groups.size(); ++c)
      for(int e : groups[c]) {
         const auto [i, j] = topo.edges[size_t(e)];
         out[c].push_back({e, pose.keypoints[size_t(i)], pose.keypoints[size_t(j)]});
      }
   return out;
}

inline Nearest nearest_segment(const Vec2& u, const std::vector<Segment>& segs) noexcept
{
   const auto first = point_segment_sq_distance(u, segs[0].a, segs[0].b);
   Nearest best{0, first.d2, first.t};
   for(size_t s = 1; s < segs.size(); ++s) {
      const auto sd = point_segment_sq_distance(u, segs[s].a, segs[s].b);
      if(sd.d2 < best.d2) best = {int(s), sd.d2, sd.t};
   }
   return best;
}

// Visit every pixel; `fn(c, pixel_index, u, nearest, value)` is called only
// for channels that own at least one edge.
template<typename Fn>
void raster(const std::vector<std::vector<Segment>>& segs, const RenderParams& params,
            Fn&& fn)
{
   const size_t plane = size_t(params.width) * size_t(params.height);
   for(size_t c = 0; c < segs.size(); ++c) {
      if(segs[c].empty()) continue;
      for(int row = 0; row < params.height; ++row)
         for(int col = 0; col < params.width; ++col) {
            const Vec2 u = pixel_center(row, col, params.width, params.height);
            const auto best = nearest_segment(u, segs[c]);
            const double y = std::exp(-params.gamma * best.d2);
            fn(c, c * plane + size_t(row) * size_t(params.width) + size_t(col), u, best, y);
         }
   }
}

// Adds dy/dp * weight for the nearest segment to `grad`.
inline void accumulate(RenderGradient& grad, const SkeletonTopology& topo,
                       const std::vector<Segment>& segs, const Vec2& u,
                       const Nearest& best, double y, double gamma, double weight)
{
   const auto& seg = segs[size_t(best.slot)];
   const Vec2 q = seg.a + best.t * (seg.b - seg.a);
   const Vec2 common = (2.0 * gamma * y * weight) * (u - q);
   const auto [i, j] = topo.edges[size_t(seg.edge)];
   grad[size_t(i)] += (1.0 - best.t) * common;
   grad[size_t(j)] += best.t * common;
}

} // namespace

SkeletonImage render(const Pose2D& pose, const SkeletonTopology& topo,
                     std::string_view layout, const RenderParams& params)
{
   check_params(params);
   const auto segs = channel_segments(pose, topo, layout);
   SkeletonImage img(int(segs.size()), params.width, params.height, std::string(layout));
   auto values = img.values();
   raster(segs, params, [&](size_t, size_t idx, const Vec2&, const Nearest&, double y) {
      values[idx] = y;
   });
   return img;
}

RenderGradient render_backward(const Pose2D& pose, const SkeletonTopology& topo,
                               std::string_view layout, const RenderParams& params,
                               std::span<const double> upstream)
{
   check_params(params);
   const auto segs = channel_segments(pose, topo, layout);
   const size_t expected = segs.size() * size_t(params.width) * size_t(params.height);
   if(upstream.size() != expected)
      throw ValidationError(fmt::format("upstream gradient has {} entries, expected {}",
                                        upstream.size(), expected));
   RenderGradient grad(size_t(pose.size()), Vec2::Zero());
   raster(segs, params, [&](size_t c, size_t idx, const Vec2& u, const Nearest& best,
                            double y) {
      if(upstream[idx] != 0.0)
         accumulate(grad, topo, segs[c], u, best, y, params.gamma, upstream[idx]);
   });
   return grad;
}

RenderLoss render_loss_and_grad(const Pose2D& pose, const SkeletonImage& target,
                                const SkeletonTopology& topo, std::string_view layout,
                                const RenderParams& params)
{
   check_params(params);
   const auto segs = channel_segments(pose, topo, layout);
   if(target.channels() != int(segs.size()) || target.width() != params.width
      || target.height() != params.height)
      throw ValidationError(fmt::format(
          "target image is {}x{}x{}, rendering layout '{}' gives {}x{}x{}",
          target.channels(), target.width(), target.height(), layout, segs.size(),
          params.width, params.height));

   const auto tv = target.values();
   const double inv_n = 1.0 / double(tv.size());
   RenderLoss out;
   out.grad.assign(size_t(pose.size()), Vec2::Zero());

   // channels without edges render as zero
   const size_t plane = target.plane_size();
   for(size_t c = 0; c < segs.size(); ++c)
      if(segs[c].empty())
         for(size_t k = c * plane; k < (c + 1) * plane; ++k) out.loss += tv[k] * tv[k];

   raster(segs, params, [&](size_t c, size_t idx, const Vec2& u, const Nearest& best,
                            double y) {
      const double r = y - tv[idx];
      out.loss += r * r;
      if(r != 0.0)
         accumulate(out.grad, topo, segs[c], u, best, y, params.gamma, 2.0 * r * inv_n);
   });
   out.loss *= inv_n;
   return out;
}

PixelArgmin pixel_argmin(const Pose2D& pose, const SkeletonTopology& topo,
                         std::string_view layout, const RenderParams& params, int channel,
                         int row, int col)
{
   check_params(params);
   const auto segs = channel_segments(pose, topo, layout);
   if(channel < 0 || channel >= int(segs.size()) || row < 0 || row >= params.height
      || col < 0 || col >= params.width)
      throw ValidationError("pixel_argmin: pixel out of range");
   PixelArgmin out;
   out.second_d2 = std::numeric_limits<double>::infinity();
   const auto& cs = segs[size_t(channel)];
   if(cs.empty()) return out;
   const Vec2 u = pixel_center(row, col, params.width, params.height);
   const auto best = nearest_segment(u, cs);
   for(size_t s = 0; s < cs.size(); ++s) {
      if(int(s) == best.slot) continue;
      out.second_d2
          = std::min(out.second_d2, point_segment_sq_distance(u, cs[s].a, cs[s].b).d2);
   }
   out.edge = cs[size_t(best.slot)].edge;
   out.t = best.t;
   out.d2 = best.d2;
   out.value = std::exp(-params.gamma * best.d2);
   return out;
}

} // namespace skelimg
