#include "skelimg/fit.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace skelimg {

const char* str(FitMode m) noexcept
{
   switch(m) {
   case FitMode::fit2d: return "fit2d";
   case FitMode::fit3d: return "fit3d";
   }
   return "?";
}

const char* str(Termination t) noexcept
{
   switch(t) {
   case Termination::converged: return "converged";
   case Termination::max_steps: return "max_steps";
   case Termination::diverged: return "diverged";
   }
   return "?";
}

FitMode to_fit_mode(std::string_view s)
{
   if(s == "fit2d" || s == "2d") return FitMode::fit2d;
   if(s == "fit3d" || s == "3d") return FitMode::fit3d;
   throw ValidationError(fmt::format("unknown fit mode '{}' (expected 2d or 3d)", s));
}

void check_problem(const FitProblem& pr)
{
   check_params(pr.render);
   check_weights(pr.weights);
   const int channels = pr.topology.channel_count(pr.layout);
   if(pr.target.channels() != channels || pr.target.width() != pr.render.width
      || pr.target.height() != pr.render.height)
      throw ValidationError(fmt::format(
          "target is {}x{}x{} but layout '{}' at {}x{} needs {} channels",
          pr.target.channels(), pr.target.width(), pr.target.height(), pr.layout,
          pr.render.width, pr.render.height, channels));
   if(pr.max_steps < 0) throw ValidationError("fit max_steps must be >= 0");
   if(pr.window < 1) throw ValidationError("fit convergence window must be >= 1");
   if(pr.mode == FitMode::fit2d) {
      if(!std::holds_alternative<Pose2D>(pr.init))
         throw ValidationError("fit2d needs a 2D initial pose");
      check_pose(std::get<Pose2D>(pr.init), pr.topology);
   } else {
      if(!std::holds_alternative<Pose3D>(pr.init))
         throw ValidationError("fit3d needs a 3D initial pose");
      check_camera(pr.camera);
      check_pose(std::get<Pose3D>(pr.init), pr.topology);
      if(pr.bone_prior) {
         if(int(pr.bone_prior->lengths.size()) != pr.topology.joint_count())
            throw ValidationError("bone prior lengths do not match the topology");
         if(!(pr.bone_prior->weight >= 0.0))
            throw ValidationError("bone prior weight must be >= 0");
      }
   }
}

Fit2DLoss fit2d_objective(const FitProblem& pr, const Pose2D& pose)
{
   auto rl = render_loss_and_grad(pose, pr.target, pr.topology, pr.layout, pr.render);
   const double w = pr.weights.w_rec_sk;
   for(auto& g : rl.grad) g *= w;
   return {w * rl.loss, std::move(rl.grad)};
}

Fit3DLoss fit3d_objective(const FitProblem& pr, const Pose3D& pose)
{
   const Pose2D p2d = project(pose, pr.camera);
   const auto rl = render_loss_and_grad(p2d, pr.target, pr.topology, pr.layout, pr.render);
   const double w = pr.weights.w_rec_sk_proj;
   Fit3DLoss out;
   out.loss = w * rl.loss;
   out.grad.resize(pose.positions.size());
   for(size_t k = 0; k < pose.positions.size(); ++k)
      out.grad[k] = w * (project_jacobian(pose.positions[k], pr.camera).transpose() * rl.grad[k]);

   if(pr.bone_prior && pr.bone_prior->weight > 0.0) {
      const auto& ref = pr.bone_prior->lengths;
      int count = 0;
      for(int k = 0; k < pr.topology.joint_count(); ++k)
         if(pr.topology.parents[size_t(k)] && ref[size_t(k)] > 0.0) ++count;
      const double scale = count > 0 ? pr.bone_prior->weight / count : 0.0;
      for(int k = 0; k < pr.topology.joint_count() && count > 0; ++k) {
         const auto& parent = pr.topology.parents[size_t(k)];
         const double L = ref[size_t(k)];
         if(!parent || !(L > 0.0)) continue;
         const Vec3 b = pose.positions[size_t(k)] - pose.positions[size_t(*parent)];
         const double len = b.norm();
         const double r = (len - L) / L;
         out.loss += scale * r * r;
         if(len > 0.0) {
            const Vec3 g = (2.0 * scale * r / (L * len)) * b;
            out.grad[size_t(k)] += g;
            out.grad[size_t(*parent)] -= g;
         }
      }
   }
   return out;
}

namespace {

bool all_finite(std::span<const double> x)
{
   for(double v : x)
      if(!std::isfinite(v)) return false;
   return true;
}

// Flat parameter vector plus the mapping to and from poses.
struct Parameterization
{
   virtual ~Parameterization() = default;
   // loss and gradient at `params`; throws on invalid geometry
   virtual double evaluate(std::span<const double> params, std::vector<double>& grad) = 0;
   virtual AnyPose pose(std::span<const double> params) const = 0;
};

struct Fit2DParams final : Parameterization
{
   const FitProblem& pr;
   explicit Fit2DParams(const FitProblem& p) : pr(p) {}

   static std::vector<double> flatten(const Pose2D& p)
   {
      std::vector<double> out;
      for(const auto& k : p.keypoints) out.insert(out.end(), {k.x(), k.y()});
      return out;
   }

   AnyPose pose(std::span<const double> x) const override
   {
      Pose2D p;
      for(size_t i = 0; i + 1 < x.size(); i += 2) p.keypoints.emplace_back(x[i], x[i + 1]);
      return p;
   }

   double evaluate(std::span<const double> x, std::vector<double>& grad) override
   {
      const auto r = fit2d_objective(pr, std::get<Pose2D>(pose(x)));
      grad = flatten(Pose2D{r.grad});
      return r.loss;
   }
};

struct Fit3DParams final : Parameterization
{
   const FitProblem& pr;
   double scale;
   std::vector<Rotation6D> orientations;

   Fit3DParams(const FitProblem& p, const Pose3D& init)
       : pr(p)
       , scale(p.position_scale)
       , orientations(init.orientations)
   {
      if(!(scale > 0.0)) {
         double z = 0.0;
         for(const auto& q : init.positions) z += q.z();
         z /= double(std::max<size_t>(init.positions.size(), 1));
         scale = std::exp2(std::round(std::log2(z / p.camera.focal())));
      }
      if(!(scale > 0.0) || !std::isfinite(scale))
         throw ValidationError("fit3d: cannot derive a position scale from the init pose");
   }

   std::vector<double> flatten(const std::vector<Vec3>& v) const
   {
      std::vector<double> out;
      for(const auto& k : v) out.insert(out.end(), {k.x() / scale, k.y() / scale, k.z() / scale});
      return out;
   }

   AnyPose pose(std::span<const double> x) const override
   {
      Pose3D p;
      for(size_t i = 0; i + 2 < x.size(); i += 3)
         p.positions.emplace_back(x[i] * scale, x[i + 1] * scale, x[i + 2] * scale);
      p.orientations = orientations;
      return p;
   }

   double evaluate(std::span<const double> x, std::vector<double>& grad) override
   {
      const auto r = fit3d_objective(pr, std::get<Pose3D>(pose(x)));
      grad.clear();
      for(const auto& g : r.grad)
         grad.insert(grad.end(), {g.x() * scale, g.y() * scale, g.z() * scale});
      return r.loss;
   }
};

} // namespace

FitResult fit(const FitProblem& pr, const AdamConfig& adam)
{
   check_problem(pr);
   check_adam(adam);

   std::unique_ptr<Parameterization> param;
   std::vector<double> x;
   if(pr.mode == FitMode::fit2d) {
      param = std::make_unique<Fit2DParams>(pr);
      x = Fit2DParams::flatten(std::get<Pose2D>(pr.init));
   } else {
      const auto& init = std::get<Pose3D>(pr.init);
      auto p3 = std::make_unique<Fit3DParams>(pr, init);
      x = p3->flatten(init.positions);
      param = std::move(p3);
   }

   FitResult res;
   res.mode = pr.mode;
   AdamState state;
   std::vector<double> grad;
   const auto window = size_t(pr.window);
   for(;;) {
      double loss = std::numeric_limits<double>::quiet_NaN();
      if(all_finite(x)) {
         try {
            loss = param->evaluate(x, grad);
         } catch(const ValidationError&) {
            // e.g. a joint pushed behind the camera
         }
      }
      res.loss_curve.push_back(loss);
      if(!std::isfinite(loss)) {
         res.termination = Termination::diverged;
         break;
      }
      const auto& c = res.loss_curve;
      if(c.size() > window && std::abs(c.back() - c[c.size() - 1 - window]) < pr.tol) {
         res.termination = Termination::converged;
         break;
      }
      if(res.steps >= pr.max_steps) {
         res.termination = Termination::max_steps;
         break;
      }
      try {
         adam_step(state, x, grad, adam);
      } catch(const DivergenceError&) {
         res.termination = Termination::diverged;
         break;
      }
      ++res.steps;
   }
   res.pose = param->pose(x);
   return res;
}

} // namespace skelimg
