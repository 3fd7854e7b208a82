#include "skelimg/adam.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace skelimg {

void check_adam(const AdamConfig& cfg)
{
   if(!(cfg.lr > 0.0)) throw ValidationError(fmt::format("adam lr must be > 0, got {}", cfg.lr));
   if(!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
      throw ValidationError(fmt::format("adam betas must be in [0, 1), got {}, {}",
                                        cfg.beta1, cfg.beta2));
   if(!(cfg.epsilon >= 0.0))
      throw ValidationError(fmt::format("adam epsilon must be >= 0, got {}", cfg.epsilon));
   if(!(cfg.clip_norm > 0.0))
      throw ValidationError(fmt::format("adam clip_norm must be > 0, got {}", cfg.clip_norm));
   if(!(cfg.lr_decay > 0.0))
      throw ValidationError(fmt::format("adam lr_decay must be > 0, got {}", cfg.lr_decay));
   if(cfg.steps_per_epoch < 1)
      throw ValidationError(fmt::format("adam steps_per_epoch must be >= 1, got {}",
                                        cfg.steps_per_epoch));
}

double effective_lr(const AdamConfig& cfg, int64_t step)
{
   const int64_t epoch = step / cfg.steps_per_epoch;
   return cfg.lr * std::pow(cfg.lr_decay, double(epoch));
}

namespace {
double l2_norm(std::span<const double> x)
{
   double s = 0.0;
   for(double v : x) s += v * v;
   return std::sqrt(s);
}
} // namespace

double clip_gradient(std::span<double> grad, double clip_norm)
{
   const double norm = l2_norm(grad);
   if(!(norm > clip_norm)) return norm;
   double scale = clip_norm / norm;
   std::vector<double> scaled(grad.size());
   for(;;) {
      for(size_t i = 0; i < grad.size(); ++i) scaled[i] = grad[i] * scale;
      if(l2_norm(scaled) <= clip_norm) break;
      scale = std::nextafter(scale, 0.0); // rounding pushed the norm just over
   }
   std::copy(scaled.begin(), scaled.end(), grad.begin());
   return norm;
}

AdamStepInfo adam_step(AdamState& state, std::span<double> params,
                       std::span<const double> grad, const AdamConfig& cfg)
{
   if(params.size() != grad.size())
      throw ValidationError(fmt::format("adam: {} params but {} gradient entries",
                                        params.size(), grad.size()));
   for(size_t i = 0; i < grad.size(); ++i)
      if(!std::isfinite(grad[i]))
         throw DivergenceError(fmt::format("adam: non-finite gradient at index {}", i));
   if(state.m.empty() && state.v.empty()) {
      state.m.assign(params.size(), 0.0);
      state.v.assign(params.size(), 0.0);
   }
   if(state.m.size() != params.size() || state.v.size() != params.size())
      throw ValidationError("adam: state does not match parameter count");

   std::vector<double> g(grad.begin(), grad.end());
   AdamStepInfo info;
   info.grad_norm = clip_gradient(g, cfg.clip_norm);
   info.clipped_norm = l2_norm(g);
   info.lr = effective_lr(cfg, state.step);

   const double t = double(state.step + 1);
   const double c1 = 1.0 - std::pow(cfg.beta1, t);
   const double c2 = 1.0 - std::pow(cfg.beta2, t);
   for(size_t i = 0; i < params.size(); ++i) {
      state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
      state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = state.m[i] / c1;
      const double v_hat = state.v[i] / c2;
      params[i] -= info.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
   }
   ++state.step;
   return info;
}

} // namespace skelimg
