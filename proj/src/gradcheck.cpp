#include "skelimg/gradcheck.hpp"

#include "skelimg/camera.hpp"
#include "skelimg/losses.hpp"
#include "skelimg/render.hpp"
#include "skelimg/rng.hpp"
#include "skelimg/rotation.hpp"
#include "skelimg/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace skelimg {

double relative_error(double a, double b, double floor) noexcept
{
   return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

namespace {

void record(GradcheckComponent& c, double analytic, double numeric, double floor)
{
   const double rel = relative_error(analytic, numeric, floor);
   ++c.checked;
   c.max_rel = std::max(c.max_rel, rel);
   if(!(rel < c.tolerance)) ++c.failed;
}

Pose2D random_pose2d(const SkeletonTopology& topo, SplitMix64& rng)
{
   Pose2D p;
   for(int k = 0; k < topo.joint_count(); ++k)
      p.keypoints.emplace_back(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
   return p;
}

GradcheckComponent check_render(const GradcheckOptions& opts)
{
   GradcheckComponent c{"render", 1e-3};
   const auto& topo = default_human_topology();
   const std::array<const char*, 3> layouts = {"1ch", "3ch", "5ch"};
   const std::array<int, 2> sizes = {16, 128};
   const double h = 1e-5;
   auto rng = SplitMix64::stream(opts.seed, 0);

   for(int s = 0; s < opts.samples; ++s) {
      const std::string layout = layouts[size_t(s) % layouts.size()];
      const int side = sizes[size_t(s / 3) % sizes.size()];
      const RenderParams params{250.0, side, side};
      const Pose2D pose = random_pose2d(topo, rng);
      const int channels = topo.channel_count(layout);

      // a pixel with a non-negligible value, so the probe says something
      PixelArgmin am;
      int ch = 0, row = 0, col = 0;
      for(int tries = 0; tries < 1000; ++tries) {
         ch = int(rng.uniform() * channels);
         row = int(rng.uniform() * side);
         col = int(rng.uniform() * side);
         am = pixel_argmin(pose, topo, layout, params, ch, row, col);
         if(am.edge >= 0 && am.value > 1e-6) break;
      }
      if(am.edge < 0) continue;
      if(am.second_d2 - am.d2 < opts.tie_margin) {
         ++c.excluded;
         continue;
      }

      std::vector<double> upstream(size_t(channels) * size_t(side) * size_t(side), 0.0);
      upstream[(size_t(ch) * size_t(side) + size_t(row)) * size_t(side) + size_t(col)] = 1.0;
      auto grad = render_backward(pose, topo, layout, params, upstream);
      if(opts.corrupt)
         for(auto& g : grad) g *= 1.01;

      const Edge& e = topo.edges[size_t(am.edge)];
      for(int k : {e.a, e.b})
         for(int d = 0; d < 2; ++d) {
            Pose2D plus = pose, minus = pose;
            plus.keypoints[size_t(k)][d] += h;
            minus.keypoints[size_t(k)][d] -= h;
            const double fp = pixel_argmin(plus, topo, layout, params, ch, row, col).value;
            const double fm = pixel_argmin(minus, topo, layout, params, ch, row, col).value;
            const double numeric = (fp - fm) / (2.0 * h);
            // floor scaled to the pixel value
            record(c, grad[size_t(k)][d], numeric, 1e-4 * std::sqrt(params.gamma) * am.value);
         }
   }
   return c;
}

GradcheckComponent check_projection(const GradcheckOptions& opts)
{
   GradcheckComponent c{"projection", 1e-5};
   auto rng = SplitMix64::stream(opts.seed, 1);
   for(int s = 0; s < opts.samples; ++s) {
      PerspectiveCamera cam;
      cam.fov_deg = rng.uniform(30.0, 100.0);
      cam.width = 64 + int(rng.uniform() * 192);
      cam.height = 64 + int(rng.uniform() * 192);
      const double z = rng.uniform(0.5, 8.0);
      const Vec3 p(rng.uniform(-0.5, 0.5) * z, rng.uniform(-0.5, 0.5) * z, z);
      const ProjectionJacobian jac = project_jacobian(p, cam);
      const double h = 1e-6 * z;
      for(int d = 0; d < 3; ++d) {
         Vec3 plus = p, minus = p;
         plus[d] += h;
         minus[d] -= h;
         const Vec2 num = (project_point(plus, cam) - project_point(minus, cam)) / (2.0 * h);
         for(int r = 0; r < 2; ++r) record(c, jac(r, d), num[r], 1e-6 * jac.norm());
      }
   }
   return c;
}

GradcheckComponent check_supervised(const GradcheckOptions& opts)
{
   GradcheckComponent c{"supervised", 1e-6};
   auto rng = SplitMix64::stream(opts.seed, 2);
   const LossWeights w;
   const auto random_pose = [&](int n) {
      Pose3D p;
      for(int k = 0; k < n; ++k) {
         p.positions.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(2, 4));
         const Vec3 axis(rng.normal(), rng.normal(), rng.normal());
         p.orientations.push_back(
             matrix_to_rot6d(axis_angle_matrix(axis.normalized(), rng.uniform(0, 3))));
      }
      return p;
   };
   const int per_pose = 10;
   for(int s = 0; s < std::max(1, opts.samples / per_pose); ++s) {
      const int n = 1 + int(rng.uniform() * 17);
      const Pose3D pred = random_pose(n), gt = random_pose(n);
      const auto a = supervised_pose_loss(pred, gt, w);
      const double h = 1e-4;
      for(int i = 0; i < per_pose; ++i) {
         const int k = int(rng.uniform() * n);
         const int d = int(rng.uniform() * 9);
         Pose3D plus = pred, minus = pred;
         double analytic;
         if(d < 3) {
            plus.positions[size_t(k)][d] += h;
            minus.positions[size_t(k)][d] -= h;
            analytic = a.grad_positions[size_t(k)][d];
         } else {
            auto vp = plus.orientations[size_t(k)].values();
            auto vm = vp;
            vp[size_t(d - 3)] += h;
            vm[size_t(d - 3)] -= h;
            plus.orientations[size_t(k)] = Rotation6D(vp);
            minus.orientations[size_t(k)] = Rotation6D(vm);
            analytic = a.grad_rot6d[size_t(k)][size_t(d - 3)];
         }
         const double numeric = (supervised_pose_loss(plus, gt, w).loss -
                                 supervised_pose_loss(minus, gt, w).loss) /
                                (2.0 * h);
         record(c, analytic, numeric, 1e-4);
      }
   }
   return c;
}

} // namespace

std::vector<GradcheckComponent> run_gradcheck(const GradcheckOptions& opts)
{
   return {check_render(opts), check_projection(opts), check_supervised(opts)};
}

} // namespace skelimg
