#pragma once

#include "skelimg/adam.hpp"
#include "skelimg/augment.hpp"
#include "skelimg/camera.hpp"
#include "skelimg/losses.hpp"
#include "skelimg/render.hpp"
#include "skelimg/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace skelimg {

struct FitSettings
{
   int max_steps = 2000;
   double tol = 1e-10;
   int window = 10;
   double bone_prior_weight = 1.0; // fit3d; 0 disables the prior
   double position_scale = 0.0;    // fit3d; <= 0 = automatic
};

// Everything a CLI run can configure. Every key in the JSON form is optional;
// missing keys keep the defaults below, unknown keys are errors.
struct CliConfig
{
   RenderParams render;
   PerspectiveCamera camera; // width/height always follow `render`
   AugmentConfig augment;
   AdamConfig adam = AdamConfig::pretrain();
   LossWeights weights;
   GeneratorConfig generator; // its augment/camera/render mirror the above
   FitSettings fit;
};

// Throws ValidationError naming the offending key path, e.g. "adam.lr".
CliConfig config_from_json(const nlohmann::json& j);
CliConfig read_config_file(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const CliConfig& cfg);

// Keeps the nested camera/render/augment copies consistent; call after
// changing any of them.
void sync_config(CliConfig& cfg);

nlohmann::ordered_json generator_to_json(const GeneratorConfig& g);

} // namespace skelimg
