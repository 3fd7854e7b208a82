#include "skelimg/synth.hpp"

#include "skelimg/config.hpp"
#include "skelimg/errors.hpp"
#include "skelimg/parallel.hpp"
#include "skelimg/rotation.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace skelimg {

void check_generator(const GeneratorConfig& cfg)
{
   if(cfg.count < 1) throw ValidationError(fmt::format("count must be >= 1, got {}", cfg.count));
   if(!(cfg.limb_limit_deg >= 0.0) || !(cfg.spine_limit_deg >= 0.0))
      throw ValidationError("rotation limits must be >= 0");
   if(!(cfg.depth_range[0] > 0.0 && cfg.depth_range[0] <= cfg.depth_range[1]))
      throw ValidationError(fmt::format("depth_range must satisfy 0 < lo <= hi, got [{}, {}]",
                                        cfg.depth_range[0], cfg.depth_range[1]));
   if(!(cfg.lateral_jitter >= 0.0)) throw ValidationError("lateral_jitter must be >= 0");
   if(!(cfg.frame_margin >= 0.0 && cfg.frame_margin < 0.5))
      throw ValidationError("frame_margin must be in [0, 0.5)");
   if(cfg.max_placement_tries < 1) throw ValidationError("max_placement_tries must be >= 1");
   if(cfg.camera.width != cfg.render.width || cfg.camera.height != cfg.render.height)
      throw ValidationError("camera and render sizes differ");
   check_augment(cfg.augment);
   check_camera(cfg.camera);
   check_params(cfg.render);
}

std::vector<double> rotation_limits(const GeneratorConfig& cfg, const SkeletonTopology& topo)
{
   const auto n = size_t(topo.joint_count());
   std::vector<double> out(n, cfg.limb_limit_deg);
   const auto lay_it = topo.channel_layouts.find(cfg.layout);
   for(size_t k = 0; k < n; ++k) {
      const auto& p = topo.parents[k];
      if(!p) {
         out[k] = cfg.spine_limit_deg;
         continue;
      }
      if(lay_it == topo.channel_layouts.end()) continue;
      for(int e = 0; e < topo.edge_count(); ++e) {
         const auto [a, b] = topo.edges[size_t(e)];
         const bool is_bone = (a == *p && b == int(k)) || (b == *p && a == int(k));
         if(is_bone && lay_it->second[size_t(e)] == 0) out[k] = cfg.spine_limit_deg;
      }
   }
   return out;
}

namespace {

Vec3 random_axis(SplitMix64& rng)
{
   const double z = rng.uniform(-1.0, 1.0);
   const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
   const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
   return {r * std::cos(phi), r * std::sin(phi), z};
}

bool in_frame(const Pose2D& p, double margin)
{
   for(const auto& k : p.keypoints)
      if(k.x() < margin || k.x() > 1.0 - margin || k.y() < margin || k.y() > 1.0 - margin)
         return false;
   return true;
}

Pose3D translated(const Pose3D& p, const Vec3& d)
{
   Pose3D out = p;
   for(auto& q : out.positions) q += d;
   return out;
}

} // namespace

PoseRecord generate_sample(const GeneratorConfig& cfg, const SkeletonTopology& topo,
                           const RestOffsets& rest, int64_t index)
{
   auto rng = SplitMix64::stream(cfg.seed, uint64_t(index));
   const auto limits = rotation_limits(cfg, topo);

   std::vector<Rotation6D> rotations;
   for(size_t k = 0; k < limits.size(); ++k) {
      const Vec3 axis = random_axis(rng);
      const double angle = rng.uniform(0.0, limits[k]) * std::numbers::pi / 180.0;
      rotations.push_back(matrix_to_rot6d(axis_angle_matrix(axis, angle)));
   }
   Pose3D body = forward_kinematics(topo, rest, rotations, Vec3::Zero());
   body = randomize_limb_lengths(body, topo, cfg.augment, rng);

   Vec3 centroid = Vec3::Zero();
   for(const auto& q : body.positions) centroid += q;
   centroid /= double(std::max(body.size(), 1));

   const double f = cfg.camera.focal();
   const auto place = [&](double depth, double jx, double jy) {
      // centroid lands at depth `depth`, offset (jx, jy) image units from center
      const Vec3 target(jx * depth / f, jy * depth / (f * cfg.camera.aspect()), depth);
      return translated(body, target - centroid);
   };

   std::optional<Pose3D> placed;
   Pose2D kp;
   for(int attempt = 0; attempt < cfg.max_placement_tries && !placed; ++attempt) {
      const double depth = rng.uniform(cfg.depth_range[0], cfg.depth_range[1]);
      const double jx = rng.uniform(-cfg.lateral_jitter, cfg.lateral_jitter);
      const double jy = rng.uniform(-cfg.lateral_jitter, cfg.lateral_jitter);
      auto cand = place(depth, jx, jy);
      const bool in_front = std::all_of(cand.positions.begin(), cand.positions.end(),
                                        [](const Vec3& q) { return q.z() > 1e-6; });
      if(!in_front) continue;
      kp = project(cand, cfg.camera);
      if(in_frame(kp, cfg.frame_margin)) placed = std::move(cand);
   }
   if(!placed) {
      auto cand = place(cfg.depth_range[1], 0.0, 0.0);
      kp = project(cand, cfg.camera);
      if(!in_frame(kp, cfg.frame_margin))
         throw ValidationError(fmt::format(
             "sample {}: pose does not fit in frame even centered at depth {}", index,
             cfg.depth_range[1]));
      placed = std::move(cand);
   }

   PoseRecord rec;
   rec.frame = index;
   rec.kp2d = kp;
   rec.set_pose3d(*placed);
   return rec;
}

Dataset generate(const GeneratorConfig& cfg, const SkeletonTopology& topo,
                 const RestOffsets& rest, unsigned threads)
{
   check_generator(cfg);
   require_valid(topo);
   tree_root(topo);
   if(int(rest.offsets.size()) != topo.joint_count())
      throw ValidationError("rest pose does not match topology");
   if(cfg.render_targets) topo.layout(cfg.layout);

   Dataset ds;
   ds.records.resize(size_t(cfg.count));
   if(cfg.render_targets) ds.targets.resize(size_t(cfg.count));
   parallel_for(size_t(cfg.count), threads, [&](size_t i) {
      ds.records[i] = generate_sample(cfg, topo, rest, int64_t(i));
      if(cfg.render_targets)
         ds.targets[i] = render(ds.records[i].kp2d, topo, cfg.layout, cfg.render);
   });
   return ds;
}

RestOffsets configured_rest(const GeneratorConfig& cfg, const SkeletonTopology& topo)
{
   if(cfg.rest_pose_file.empty()) {
      if(topo != default_human_topology())
         throw ValidationError("custom topologies need generator.rest_pose_file");
      return default_human_rest();
   }
   const auto recs = read_pose_file(cfg.rest_pose_file);
   if(recs.empty() || !recs.front().pos3d)
      throw ValidationError(fmt::format("{}: first record has no pos3d for the rest pose",
                                        cfg.rest_pose_file));
   return rest_offsets_from_pose(*recs.front().pose3d(), topo);
}

Dataset generate(const GeneratorConfig& cfg, const SkeletonTopology& topo, unsigned threads)
{
   return generate(cfg, topo, configured_rest(cfg, topo), threads);
}

void write_dataset(const std::filesystem::path& dir, const Dataset& ds,
                   const GeneratorConfig& cfg)
{
   std::error_code ec;
   std::filesystem::create_directories(dir, ec);
   if(ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
   write_pose_file(dir / "poses.jsonl", ds.records);
   if(!ds.targets.empty()) {
      const auto tdir = dir / "targets";
      std::filesystem::create_directories(tdir, ec);
      if(ec) throw IoError(fmt::format("cannot create '{}': {}", tdir.string(), ec.message()));
      for(size_t i = 0; i < ds.targets.size(); ++i)
         write_skim(tdir / fmt::format("{:06d}.skim", ds.records[i].frame), ds.targets[i]);
   }
   nlohmann::ordered_json manifest;
   manifest["seed"] = cfg.seed;
   manifest["count"] = cfg.count;
   manifest["config"] = generator_to_json(cfg);
   write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace skelimg
