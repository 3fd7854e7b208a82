#pragma once

#include "skelimg/adam.hpp"
#include "skelimg/camera.hpp"
#include "skelimg/losses.hpp"
#include "skelimg/pose.hpp"
#include "skelimg/render.hpp"
#include "skelimg/topology.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace skelimg {

enum class FitMode { fit2d, fit3d };
enum class Termination { converged, max_steps, diverged };

const char* str(FitMode m) noexcept;
const char* str(Termination t) noexcept;
FitMode to_fit_mode(std::string_view s);

// Soft constraint on 3D bone lengths: weight * mean_k ((|b_k| - L_k) / L_k)^2
// over joints with a reference length L_k > 0.
struct BonePrior
{
   std::vector<double> lengths; // per joint, bone to parent; 0 = unconstrained
   double weight = 1.0;
};

using AnyPose = std::variant<Pose2D, Pose3D>;

struct FitProblem
{
   SkeletonImage target;
   FitMode mode = FitMode::fit2d;
   SkeletonTopology topology;
   std::string layout = "5ch";
   RenderParams render;
   PerspectiveCamera camera; // fit3d only
   AnyPose init;
   std::optional<BonePrior> bone_prior; // fit3d only
   LossWeights weights;
   int max_steps = 2000;
   double tol = 1e-10;      // on |loss[n] - loss[n - window]|
   int window = 10;
   // fit3d optimizes positions / position_scale (meters). <= 0 picks the
   // power of two nearest to mean depth over focal length, so one unit moves
   // a joint by roughly one image width.
   double position_scale = 0.0;
};

void check_problem(const FitProblem& problem);

struct FitResult
{
   FitMode mode = FitMode::fit2d;
   AnyPose pose;
   std::vector<double> loss_curve; // loss_curve[n] = loss after n updates
   int steps = 0;
   Termination termination = Termination::max_steps;

   double final_loss() const { return loss_curve.back(); }
};

struct Fit2DLoss
{
   double loss = 0.0;
   RenderGradient grad;
};

struct Fit3DLoss
{
   double loss = 0.0;
   std::vector<Vec3> grad; // w.r.t. positions, meters
};

// The objectives `fit` minimizes, exposed for gradient checks.
Fit2DLoss fit2d_objective(const FitProblem& problem, const Pose2D& pose);
Fit3DLoss fit3d_objective(const FitProblem& problem, const Pose3D& pose);

FitResult fit(const FitProblem& problem, const AdamConfig& adam);

} // namespace skelimg
