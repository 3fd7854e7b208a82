#include "skelimg/losses.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

namespace skelimg {

LossWeights LossWeights::scaled(double s) const
{
   LossWeights w = *this;
   for(double* x : {&w.w_sk, &w.w_pos_2d, &w.w_pos_3d, &w.w_orient_3d, &w.w_rec_sk,
                    &w.w_rec_sk_proj, &w.w_disc_sk, &w.w_perc_img, &w.w_disc_img,
                    &w.w_disc_img_fm, &w.w_pos, &w.w_orient})
      *x *= s;
   return w;
}

void check_weights(const LossWeights& w)
{
   for(double x : {w.w_sk, w.w_pos_2d, w.w_pos_3d, w.w_orient_3d, w.w_rec_sk,
                   w.w_rec_sk_proj, w.w_disc_sk, w.w_perc_img, w.w_disc_img,
                   w.w_disc_img_fm, w.w_pos, w.w_orient})
      if(!(x >= 0.0)) throw ValidationError(fmt::format("loss weight {} is negative", x));
}

SupervisedLoss supervised_pose_loss(const Pose3D& pred, const Pose3D& gt,
                                    const LossWeights& weights)
{
   const size_t n = pred.positions.size();
   if(gt.positions.size() != n || pred.orientations.size() != n
      || gt.orientations.size() != n)
      throw ValidationError(fmt::format("supervised_pose_loss: pred has {} joints, gt {}",
                                        n, gt.positions.size()));
   SupervisedLoss out;
   out.grad_positions.assign(n, Vec3::Zero());
   out.grad_rot6d.assign(n, {});
   if(n == 0) return out;

   const double inv_n = 1.0 / double(n);
   double pos = 0.0;
   double orient = 0.0;
   for(size_t k = 0; k < n; ++k) {
      const Vec3 d = pred.positions[k] - gt.positions[k];
      pos += d.squaredNorm();
      out.grad_positions[k] = (2.0 * weights.w_pos * inv_n) * d;
      for(int i = 0; i < 6; ++i) {
         const double r = pred.orientations[k][i] - gt.orientations[k][i];
         orient += r * r;
         out.grad_rot6d[k][size_t(i)] = 2.0 * weights.w_orient * inv_n * r;
      }
   }
   out.loss = weights.w_pos * pos * inv_n + weights.w_orient * orient * inv_n;
   return out;
}

} // namespace skelimg
