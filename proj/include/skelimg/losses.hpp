#pragma once

#include "skelimg/pose.hpp"

#include <array>
#include <vector>

namespace skelimg {

// Loss weights. Only w_rec_sk, w_rec_sk_proj, w_pos and w_orient are used by
// the pose-fitting code; the rest are kept so the full table lives in one
// place and round-trips through config files.
struct LossWeights
{
   // synthetic supervision
   double w_sk = 100.0;
   double w_pos_2d = 100.0;
   double w_pos_3d = 100.0;
   double w_orient_3d = 10.0;
   // unsupervised
   double w_rec_sk = 1000.0;
   double w_rec_sk_proj = 1000.0;
   double w_disc_sk = 10.0;
   double w_perc_img = 10.0;
   double w_disc_img = 1.0;
   double w_disc_img_fm = 10.0;
   // pretraining
   double w_pos = 10.0;
   double w_orient = 1.0;

   LossWeights scaled(double s) const;
};

void check_weights(const LossWeights& w);

struct SupervisedLoss
{
   double loss = 0.0;
   std::vector<Vec3> grad_positions;
   std::vector<std::array<double, 6>> grad_rot6d;
};

// w_pos * mean_k |p_k - g_k|^2 + w_orient * mean_k |r_k - s_k|^2 over the 6D
// orientation vectors, with its exact gradient w.r.t. pred.
SupervisedLoss supervised_pose_loss(const Pose3D& pred, const Pose3D& gt,
                                    const LossWeights& weights);

} // namespace skelimg
