#pragma once

#include "skelimg/fit.hpp"
#include "skelimg/pose.hpp"
#include "skelimg/render.hpp"
#include "skelimg/topology.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skelimg {

using ojson = nlohmann::ordered_json;

// ------------------------------------------------------------------- topology
//
ojson topology_to_json(const SkeletonTopology& topo);
SkeletonTopology topology_from_json(const nlohmann::json& j);
SkeletonTopology read_topology_file(const std::filesystem::path& path);
void write_topology_file(const std::filesystem::path& path, const SkeletonTopology& topo);

// ---------------------------------------------------------------- pose records
//
// One line of a pose JSON-lines file:
// {"frame", "activity", "kp2d", "pos3d", "rot6d"}; the last two may be null.
struct PoseRecord
{
   int64_t frame = 0;
   std::optional<std::string> activity;
   Pose2D kp2d;
   std::optional<std::vector<Vec3>> pos3d;
   std::optional<std::vector<Rotation6D>> rot6d;

   // pos3d with rot6d, identity orientations when rot6d is absent
   std::optional<Pose3D> pose3d() const;
   void set_pose3d(const Pose3D& p);

   friend bool operator==(const PoseRecord&, const PoseRecord&) = default;
};

ojson pose_record_to_json(const PoseRecord& rec);
PoseRecord pose_record_from_json(const nlohmann::json& j);

std::string dump_pose_records(std::span<const PoseRecord> recs);
// `source` names the input in error messages ("poses.jsonl:12: ...").
std::vector<PoseRecord> parse_pose_records(std::string_view text,
                                           std::string_view source = "<input>");

std::vector<PoseRecord> read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path, std::span<const PoseRecord> recs);

// ------------------------------------------------------------------ fit results
//
// {"mode", "steps", "termination", "final_loss", "loss_curve", "pose"}; the
// pose holds "kp2d" (fit2d) or "pos3d" and "rot6d" (fit3d).
ojson fit_result_to_json(const FitResult& result);
// "step,loss" rows
std::string loss_curve_csv(const FitResult& result);

// ----------------------------------------------------------------------- SKIM
//
// "SKIM", u8 version, u32 C, W, H (little endian), then C*W*H little-endian
// float32 values, planar, row-major within a plane.
constexpr uint8_t k_skim_version = 1;

std::string encode_skim(const SkeletonImage& img);
SkeletonImage decode_skim(std::string_view bytes);
void write_skim(const std::filesystem::path& path, const SkeletonImage& img);
SkeletonImage read_skim(const std::filesystem::path& path);

// Values rounded through float32, the precision SKIM stores.
SkeletonImage quantize_f32(const SkeletonImage& img);

// ---------------------------------------------------------------------- files
//
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace skelimg
