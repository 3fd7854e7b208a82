#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace skelimg {

struct AdamConfig
{
   double lr = 2e-5;
   double beta1 = 0.5;
   double beta2 = 0.999;
   double epsilon = 1e-8;
   double clip_norm = 1.0; // max global L2 norm of the gradient
   double lr_decay = 0.95; // per epoch
   int64_t steps_per_epoch = 100;
   int batch_size = 8;     // recorded with the preset, unused by pose fitting

   /// End-to-end training recipe (the defaults above).
   static AdamConfig e2e() { return {}; }

   /// Module pretraining recipe; the default for pose fitting.
   static AdamConfig pretrain()
   {
      AdamConfig c;
      c.lr = 2e-4;
      c.beta1 = 0.9;
      c.batch_size = 16;
      return c;
   }
};

void check_adam(const AdamConfig& cfg);

/// lr * lr_decay^floor(step / steps_per_epoch)
double effective_lr(const AdamConfig& cfg, int64_t step);

struct AdamState
{
   std::vector<double> m;
   std::vector<double> v;
   int64_t step = 0; // completed updates
};

struct AdamStepInfo
{
   double grad_norm = 0.0;    // before clipping
   double clipped_norm = 0.0; // after clipping
   double lr = 0.0;           // effective learning rate used
};

// Rescales `grad` in place so its L2 norm is at most clip_norm. Returns the
// norm before clipping.
double clip_gradient(std::span<double> grad, double clip_norm);

// One clipped, bias-corrected Adam update of `params` (descent direction).
// Throws DivergenceError on a non-finite gradient; state is left untouched.
AdamStepInfo adam_step(AdamState& state, std::span<double> params,
                       std::span<const double> grad, const AdamConfig& cfg);

} // namespace skelimg
