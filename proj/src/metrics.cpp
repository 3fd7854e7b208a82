#include "skelimg/metrics.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace skelimg {

const char* str(FlipPolicy p) noexcept
{
   return p == FlipPolicy::ignore_flip ? "ignore_flip" : "consider_flip";
}

namespace {

double mean_sq_error(const Pose2D& pred, const Pose2D& gt, int width, int height,
                     std::span<const bool> visible, std::vector<double>* per_kp)
{
   double sum = 0.0;
   int count = 0;
   for(size_t k = 0; k < gt.keypoints.size(); ++k) {
      const bool vis = visible.empty() || visible[k];
      const double dx = (pred.keypoints[k].x() - gt.keypoints[k].x()) * width;
      const double dy = (pred.keypoints[k].y() - gt.keypoints[k].y()) * height;
      const double e = vis ? dx * dx + dy * dy : 0.0;
      if(per_kp) per_kp->push_back(e);
      if(vis) {
         sum += e;
         ++count;
      }
   }
   return count > 0 ? sum / count : 0.0;
}

} // namespace

FrameError frame_error(const Pose2D& pred, const Pose2D& gt, const SkeletonTopology& topo,
                       int width, int height, std::span<const bool> visible)
{
   if(pred.size() != gt.size() || gt.size() != topo.joint_count())
      throw ValidationError(fmt::format(
          "frame_error: pred has {} keypoints, gt {}, topology {}", pred.size(), gt.size(),
          topo.joint_count()));
   if(!visible.empty() && int(visible.size()) != gt.size())
      throw ValidationError("frame_error: visibility mask does not match keypoints");
   if(width < 1 || height < 1) throw ValidationError("frame_error: image size must be positive");

   FrameError out;
   out.score = mean_sq_error(pred, gt, width, height, visible, &out.per_keypoint);
   out.flipped_score
       = mean_sq_error(flip_pose(pred, topo), gt, width, height, visible, nullptr);
   return out;
}

ErrorStats summarize(std::vector<double> values)
{
   if(values.empty()) throw ValidationError("cannot aggregate an empty set of frames");
   std::sort(values.begin(), values.end());
   double sum = 0.0;
   for(double v : values) sum += v;
   const size_t n = values.size();
   ErrorStats s;
   s.frames = int64_t(n);
   s.mean = sum / double(n);
   s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
   return s;
}

std::map<std::string, ErrorStats> aggregate(std::span<const FrameError> frames,
                                            FlipPolicy policy)
{
   if(frames.empty()) throw ValidationError("cannot aggregate an empty set of frames");
   std::map<std::string, std::vector<double>> groups;
   std::vector<double> all;
   for(const auto& f : frames) {
      const double v = f.value(policy);
      all.push_back(v);
      if(f.activity) {
         if(*f.activity == "all")
            throw ValidationError("activity name 'all' is reserved for the pooled row");
         groups[*f.activity].push_back(v);
      }
   }
   std::map<std::string, ErrorStats> out;
   for(auto& [name, vals] : groups) out[name] = summarize(std::move(vals));
   out["all"] = summarize(std::move(all));
   return out;
}

EvalReport aggregate(std::span<const FrameError> frames)
{
   auto ig = aggregate(frames, FlipPolicy::ignore_flip);
   auto co = aggregate(frames, FlipPolicy::consider_flip);
   EvalReport r;
   r.all = {ig.at("all"), co.at("all")};
   ig.erase("all");
   for(const auto& [name, s] : ig) r.activities[name] = {s, co.at(name)};
   return r;
}

std::string report_csv(const EvalReport& report, const CsvOptions& opts)
{
   std::string out = "activity";
   if(opts.ignore) out += ",mean_ignore,median_ignore";
   if(opts.consider) out += ",mean_consider,median_consider";
   if(opts.rmse) {
      if(opts.ignore) out += ",rmse_ignore";
      if(opts.consider) out += ",rmse_consider";
   }
   out += ",frames\n";

   const auto row = [&](const std::string& name, const ReportRow& r) {
      out += name;
      if(opts.ignore) out += fmt::format(",{:.2f},{:.2f}", r.ignore.mean, r.ignore.median);
      if(opts.consider)
         out += fmt::format(",{:.2f},{:.2f}", r.consider.mean, r.consider.median);
      if(opts.rmse) {
         if(opts.ignore) out += fmt::format(",{:.2f}", std::sqrt(r.ignore.mean));
         if(opts.consider) out += fmt::format(",{:.2f}", std::sqrt(r.consider.mean));
      }
      out += fmt::format(",{}\n", r.ignore.frames);
   };
   // std::map keeps activities in lexicographic order
   for(const auto& [name, r] : report.activities) row(name, r);
   row("all", report.all);
   return out;
}

} // namespace skelimg
