#pragma once

#include "skelimg/pose.hpp"
#include "skelimg/topology.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skelimg {

enum class FlipPolicy { ignore_flip, consider_flip };

const char* str(FlipPolicy p) noexcept;

// Squared pixel errors of one frame at a given image size.
struct FrameError
{
   int64_t frame = 0;
   std::optional<std::string> activity;
   std::vector<double> per_keypoint; // pixel^2; 0 for masked keypoints
   double score = 0.0;               // mean over visible keypoints
   double flipped_score = 0.0;       // same, for flip_pose(pred)

   double value(FlipPolicy p) const noexcept
   {
      return p == FlipPolicy::ignore_flip ? std::min(score, flipped_score) : score;
   }
};

// `visible`, when given, excludes keypoints from the mean (default: all).
FrameError frame_error(const Pose2D& pred, const Pose2D& gt, const SkeletonTopology& topo,
                       int width, int height, std::span<const bool> visible = {});

struct ErrorStats
{
   double mean = 0.0;
   double median = 0.0;
   int64_t frames = 0;
};

struct ReportRow
{
   ErrorStats ignore;
   ErrorStats consider;
};

// One row per activity plus the pooled row for all frames. Frames without an
// activity only count towards `all`.
struct EvalReport
{
   std::map<std::string, ReportRow> activities;
   ReportRow all;
};

/// Mean and median (average of the two central values for even counts).
/// Values are summed in ascending order, so the result does not depend on
/// input order. Throws ValidationError on empty input.
ErrorStats summarize(std::vector<double> values);

// Stats of frame values under one policy, grouped like EvalReport.
std::map<std::string, ErrorStats> aggregate(std::span<const FrameError> frames,
                                            FlipPolicy policy);

EvalReport aggregate(std::span<const FrameError> frames);

struct CsvOptions
{
   bool ignore = true;
   bool consider = true;
   bool rmse = false; // extra sqrt(mean) columns, for sanity checks
};

// Header "activity,mean_ignore,median_ignore,mean_consider,median_consider,frames",
// activities sorted, "all" last, values with two decimals.
std::string report_csv(const EvalReport& report, const CsvOptions& opts = {});

} // namespace skelimg
