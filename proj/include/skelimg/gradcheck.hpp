#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace skelimg {

// Central finite-difference checks of the analytic derivatives.
struct GradcheckOptions
{
   int samples = 1000;      // probes per component
   uint64_t seed = 0;
   double tie_margin = 1e-4; // skip render probes whose two nearest edges are closer
   bool corrupt = false;     // perturb the analytic render gradient (negative control)
};

struct GradcheckComponent
{
   std::string name;
   double tolerance = 0.0;
   int64_t checked = 0;  // coordinates compared
   int64_t excluded = 0; // probes skipped as argmin ties
   int64_t failed = 0;
   double max_rel = 0.0;

   bool pass() const noexcept { return checked > 0 && failed == 0; }
};

// Components: "render" (keypoint gradient of single pixels at 16x16 and
// 128x128 over all layouts of the default topology), "projection" (camera
// Jacobian) and "supervised" (pretraining pose loss).
std::vector<GradcheckComponent> run_gradcheck(const GradcheckOptions& opts);

// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor) noexcept;

} // namespace skelimg
