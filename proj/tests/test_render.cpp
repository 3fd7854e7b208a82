#include "oracles.hpp"

#include "skelimg/errors.hpp"
#include "skelimg/render.hpp"

#include <doctest.h>

#include <cmath>

using namespace skelimg;

namespace {

const SkeletonTopology& two_edge_topology()
{
   static const SkeletonTopology t = [] {
      SkeletonTopology t;
      t.joints = {"a", "b", "c"};
      t.edges = {{0, 1}, {1, 2}};
      t.parents = {std::nullopt, 0, 1};
      t.flip_map = {0, 1, 2};
      t.channel_layouts["1ch"] = {0, 0};
      t.channel_layouts["2ch"] = {0, 1};
      return t;
   }();
   return t;
}

Pose2D uniform_pose(int n, Vec2 p)
{
   Pose2D out;
   out.keypoints.assign(size_t(n), p);
   return out;
}

} // namespace

TEST_CASE("point_segment_sq_distance")
{
   auto r = point_segment_sq_distance({0, 1}, {-1, 0}, {1, 0});
   CHECK(r.d2 == 1.0);
   CHECK(r.t == 0.5);
   r = point_segment_sq_distance({2, 0}, {-1, 0}, {1, 0});
   CHECK(r.d2 == 1.0);
   CHECK(r.t == 1.0);
   r = point_segment_sq_distance({-1, 0}, {-1, 0}, {1, 0});
   CHECK(r.d2 == 0.0);
   CHECK(r.t == 0.0);
   r = point_segment_sq_distance({3, 4}, {0, 0}, {0, 0});
   CHECK(r.d2 == 25.0);
   CHECK(r.t == 0.0);
}

TEST_CASE("closed-form pixel value")
{
   // a pixel centre of a 10x10 image lies at (0.55, 0.65)
   const auto& t = two_edge_topology();
   Pose2D p;
   p.keypoints = {{0.25, 0.55}, {0.75, 0.55}, {0.75, 0.55}};
   const auto img = render(p, t, "2ch", {250.0, 10, 10});
   CHECK(img.at(0, 6, 5) == doctest::Approx(0.0820849986238988).epsilon(1e-12));
   // channel 1 holds only a degenerate edge: a point at (0.75, 0.55)
   CHECK(img.at(1, 5, 7) == doctest::Approx(1.0));
   CHECK(img.at(1, 5, 7) == img.at(1, 5, 7));
}

TEST_CASE("pixel on a keypoint renders 1")
{
   const auto& t = two_edge_topology();
   Pose2D p;
   p.keypoints = {{0.05, 0.05}, {0.55, 0.05}, {0.55, 0.95}};
   const auto img = render(p, t, "1ch", {250.0, 10, 10});
   CHECK(img.at(0, 0, 0) == 1.0);
   CHECK(img.at(0, 9, 5) == 1.0);
}

TEST_CASE("render matches the brute-force oracle")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(21);
   for(const char* layout : {"1ch", "3ch", "5ch"})
      for(int i = 0; i < 3; ++i) {
         const auto p = oracle::random_pose(t, rng);
         const RenderParams params{250.0, 24, 20};
         const auto img = render(p, t, layout, params);
         CHECK(img.layout() == layout);
         double worst = 0.0;
         for(int c = 0; c < img.channels(); ++c)
            for(int r = 0; r < 20; ++r)
               for(int col = 0; col < 24; ++col) {
                  const double v = img.at(c, r, col);
                  CHECK(v >= 0.0);
                  CHECK(v <= 1.0);
                  worst = std::max(worst, std::abs(v - oracle::pixel(p, t, layout, 250.0, 24,
                                                                     20, c, r, col)));
               }
         CHECK(worst < 1e-12);
      }
}

TEST_CASE("empty channel renders zeros")
{
   auto t = two_edge_topology();
   t.channel_layouts["3ch"] = {0, 2}; // channel 1 has no edges; validate would object
   Pose2D p;
   p.keypoints = {{0.2, 0.2}, {0.5, 0.5}, {0.8, 0.2}};
   const auto img = render(p, t, "3ch", {250.0, 8, 8});
   REQUIRE(img.channels() == 3);
   for(double v : img.plane(1)) CHECK(v == 0.0);
}

TEST_CASE("5ch max equals 1ch")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(5);
   for(int i = 0; i < 5; ++i) {
      const auto p = oracle::random_pose(t, rng);
      const RenderParams params{250.0, 32, 32};
      const auto one = render(p, t, "1ch", params);
      for(const char* layout : {"3ch", "5ch"}) {
         const auto many = render(p, t, layout, params);
         double worst = 0.0;
         for(size_t i2 = 0; i2 < one.plane_size(); ++i2) {
            double m = 0.0;
            for(int c = 0; c < many.channels(); ++c) m = std::max(m, many.plane(c)[i2]);
            worst = std::max(worst, std::abs(m - one.values()[i2]));
         }
         CHECK(worst <= 1e-12);
      }
   }
}

TEST_CASE("label flip is invisible in 1ch, visible in 5ch")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(8);
   const RenderParams params{250.0, 64, 64};
   for(int i = 0; i < 5; ++i) {
      const auto p = oracle::random_pose(t, rng);
      const auto f = flip_pose(p, t);
      const auto a = render(p, t, "1ch", params), b = render(f, t, "1ch", params);
      double d1 = 0.0;
      for(size_t k = 0; k < a.size(); ++k)
         d1 = std::max(d1, std::abs(a.values()[k] - b.values()[k]));
      CHECK(d1 <= 1e-12);
      const auto c = render(p, t, "5ch", params), d = render(f, t, "5ch", params);
      double d5 = 0.0;
      for(size_t k = 0; k < c.size(); ++k)
         d5 = std::max(d5, std::abs(c.values()[k] - d.values()[k]));
      CHECK(d5 > 0.1);

      CHECK(render_loss_and_grad(p, b, t, "1ch", params).loss <= 1e-24);
      CHECK(render_loss_and_grad(p, d, t, "5ch", params).loss > 1e-4);
   }
}

TEST_CASE("one-pixel shift moves the image one column")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(9);
   const int w = 32;
   const auto p = oracle::random_pose(t, rng, 0.2, 0.7);
   auto q = p;
   for(auto& k : q.keypoints) k.x() += 1.0 / w;
   const auto a = render(p, t, "5ch", {250.0, w, w});
   const auto b = render(q, t, "5ch", {250.0, w, w});
   double worst = 0.0;
   for(int c = 0; c < 5; ++c)
      for(int r = 0; r < w; ++r)
         for(int col = 1; col < w; ++col)
            worst = std::max(worst, std::abs(b.at(c, r, col) - a.at(c, r, col - 1)));
   CHECK(worst <= 1e-12);
}

TEST_CASE("render is deterministic and monotone in distance")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(10);
   const auto p = oracle::random_pose(t, rng);
   CHECK(render(p, t, "5ch", {}) == render(p, t, "5ch", {}));

   const auto& two = two_edge_topology();
   Pose2D line;
   line.keypoints = {{0.0, 0.05}, {1.0, 0.05}, {1.0, 0.05}};
   const auto img = render(line, two, "1ch", {250.0, 1, 10});
   for(int r = 1; r < 10; ++r) CHECK(img.at(0, r, 0) < img.at(0, r - 1, 0));
}

TEST_CASE("render argument errors")
{
   const auto& t = default_human_topology();
   auto p = uniform_pose(17, {0.5, 0.5});
   CHECK_THROWS_AS(render(p, t, "4ch", {}), ValidationError);
   CHECK_THROWS_AS(render(uniform_pose(3, {0.5, 0.5}), t, "5ch", {}), ValidationError);
   p.keypoints[4].x() = std::nan("");
   CHECK_THROWS_AS(render(p, t, "5ch", {}), ValidationError);
   CHECK_THROWS_AS(render(uniform_pose(17, {0.5, 0.5}), t, "5ch", {0.0, 8, 8}),
                   ValidationError);
   CHECK_THROWS_AS(render(uniform_pose(17, {0.5, 0.5}), t, "5ch", {250.0, 0, 8}),
                   ValidationError);
   std::vector<double> upstream(10);
   CHECK_THROWS_AS(render_backward(uniform_pose(17, {0.5, 0.5}), t, "5ch", {}, upstream),
                   ValidationError);
}

TEST_CASE("backward: trivial cases")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(12);
   const auto p = oracle::random_pose(t, rng);
   const RenderParams params{250.0, 16, 16};
   std::vector<double> zero(5 * 16 * 16, 0.0);
   for(const auto& g : render_backward(p, t, "5ch", params, zero)) CHECK(g.isZero(0.0));

   // loss at the target itself
   const auto target = render(p, t, "5ch", params);
   const auto lg = render_loss_and_grad(p, target, t, "5ch", params);
   CHECK(lg.loss == 0.0);
   for(const auto& g : lg.grad) CHECK(g.isZero(0.0));

   // far off-screen against a black target
   const auto far = uniform_pose(17, {10.0, 10.0});
   SkeletonImage black(5, 128, 128, "5ch");
   CHECK(render_loss_and_grad(far, black, t, "5ch", {}).loss < 1e-12);

   // a pixel centred on a keypoint of its nearest edge contributes nothing
   const auto& two = two_edge_topology();
   Pose2D on_pixel;
   on_pixel.keypoints = {{0.125, 0.125}, {0.875, 0.125}, {0.875, 0.125}};
   std::vector<double> one_hot(2 * 4 * 4, 0.0);
   one_hot[0] = 1.0; // pixel (0, 0), centre (0.125, 0.125)
   for(const auto& g : render_backward(on_pixel, two, "2ch", {250.0, 4, 4}, one_hot))
      CHECK(g.isZero(0.0));
}

TEST_CASE("backward matches finite differences of the oracle")
{
   // random 2-edge poses on 16x16, random upstream weights
   const auto& t = two_edge_topology();
   auto rng = SplitMix64(13);
   const double h = 1e-5;
   int compared = 0, bad = 0;
   for(int trial = 0; trial < 40; ++trial) {
      const auto p = oracle::random_pose(t, rng, 0.2, 0.8);
      const RenderParams params{250.0, 16, 16};
      std::vector<double> up(2 * 16 * 16);
      for(auto& u : up) u = rng.uniform(-1, 1);

      // one edge per channel in "2ch": no argmin ties
      const auto loss = [&](const Pose2D& q) {
         double s = 0.0;
         for(int c = 0; c < 2; ++c)
            for(int r = 0; r < 16; ++r)
               for(int col = 0; col < 16; ++col)
                  s += up[size_t(c * 256 + r * 16 + col)]
                       * oracle::pixel(q, t, "2ch", 250.0, 16, 16, c, r, col);
         return s;
      };
      const auto g = render_backward(p, t, "2ch", params, up);
      for(int k = 0; k < 3; ++k)
         for(int d = 0; d < 2; ++d) {
            auto a = p, b = p;
            a.keypoints[size_t(k)][d] += h;
            b.keypoints[size_t(k)][d] -= h;
            const double num = (loss(a) - loss(b)) / (2 * h);
            const double an = g[size_t(k)][d];
            const double rel = std::abs(an - num) / std::max({std::abs(an), std::abs(num), 1e-3});
            ++compared;
            if(rel >= 1e-3) ++bad;
         }
   }
   CHECK(compared == 240);
   CHECK(bad == 0);
}

TEST_CASE("loss gradient chains 2r/N through backward")
{
   const auto& t = default_human_topology();
   auto rng = SplitMix64(14);
   const auto p = oracle::random_pose(t, rng);
   const auto q = oracle::random_pose(t, rng);
   const RenderParams params{250.0, 16, 16};
   const auto target = render(q, t, "5ch", params);
   const auto y = render(p, t, "5ch", params);
   const auto lg = render_loss_and_grad(p, target, t, "5ch", params);
   std::vector<double> up(y.size());
   double loss = 0.0;
   for(size_t i = 0; i < up.size(); ++i) {
      const double r = y.values()[i] - target.values()[i];
      loss += r * r;
      up[i] = 2.0 * r / double(up.size());
   }
   CHECK(lg.loss == doctest::Approx(loss / double(up.size())).epsilon(1e-12));
   const auto g = render_backward(p, t, "5ch", params, up);
   for(size_t k = 0; k < g.size(); ++k) CHECK((g[k] - lg.grad[k]).norm() <= 1e-12 * (1 + g[k].norm()));

   SkeletonImage wrong(5, 8, 8, "5ch");
   CHECK_THROWS_AS(render_loss_and_grad(p, wrong, t, "5ch", params), ValidationError);
}

TEST_CASE("pixel_argmin ties go to the lowest edge")
{
   const auto& t = two_edge_topology();
   Pose2D p;
   // both edges coincide
   p.keypoints = {{0.1, 0.5}, {0.9, 0.5}, {0.1, 0.5}};
   const auto am = pixel_argmin(p, t, "1ch", {250.0, 8, 8}, 0, 2, 3);
   CHECK(am.edge == 0);
   CHECK(am.second_d2 == doctest::Approx(am.d2));
}
