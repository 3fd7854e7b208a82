#pragma once

#include "skelimg/render.hpp"

#include <filesystem>
#include <vector>

namespace skelimg {

// One 8-bit grayscale PNG per channel (value = round(255 * y)), named
// <stem>_ch<N>.png. Returns the written paths.
std::vector<std::filesystem::path> write_channel_pngs(const std::filesystem::path& dir,
                                                      const SkeletonImage& img,
                                                      const std::string& stem = "skeleton");

// False-colour RGB preview: each channel tinted with a fixed palette colour,
// combined by per-component max. Not meant to be read back.
void write_composite_png(const std::filesystem::path& path, const SkeletonImage& img);

} // namespace skelimg
