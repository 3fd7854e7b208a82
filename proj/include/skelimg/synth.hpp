#pragma once

#include "skelimg/augment.hpp"
#include "skelimg/camera.hpp"
#include "skelimg/io.hpp"
#include "skelimg/kinematics.hpp"
#include "skelimg/render.hpp"
#include "skelimg/topology.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace skelimg {

struct GeneratorConfig
{
   uint64_t seed = 0;
   int count = 100;
   // empty: default_human_rest(); otherwise a pose file whose first record's
   // pos3d is the rest pose
   std::string rest_pose_file;
   double limb_limit_deg = 60.0;
   double spine_limit_deg = 20.0; // root and joints whose bone is in channel 0
   std::array<double, 2> depth_range = {2.5, 4.5}; // root depth, meters
   double lateral_jitter = 0.1; // normalized image units
   double frame_margin = 0.05;  // keypoints must land in [m, 1 - m]^2
   int max_placement_tries = 100;
   bool render_targets = true;
   std::string layout = "5ch";
   AugmentConfig augment;
   PerspectiveCamera camera;
   RenderParams render;
};

void check_generator(const GeneratorConfig& cfg);

struct Dataset
{
   std::vector<PoseRecord> records;
   std::vector<SkeletonImage> targets; // empty unless render_targets
};

// Per-joint rotation limit in degrees.
std::vector<double> rotation_limits(const GeneratorConfig& cfg, const SkeletonTopology& topo);

// One sample; deterministic in (cfg.seed, index).
PoseRecord generate_sample(const GeneratorConfig& cfg, const SkeletonTopology& topo,
                           const RestOffsets& rest, int64_t index);

Dataset generate(const GeneratorConfig& cfg, const SkeletonTopology& topo,
                 const RestOffsets& rest, unsigned threads = 1);

/// Rest pose named by cfg.rest_pose_file, or the built-in one.
RestOffsets configured_rest(const GeneratorConfig& cfg, const SkeletonTopology& topo);

/// generate() with configured_rest().
Dataset generate(const GeneratorConfig& cfg, const SkeletonTopology& topo,
                 unsigned threads = 1);

// poses.jsonl, targets/NNNNNN.skim, manifest.json
void write_dataset(const std::filesystem::path& dir, const Dataset& ds,
                   const GeneratorConfig& cfg);

} // namespace skelimg
