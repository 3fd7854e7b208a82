#include "skelimg/png_export.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>
#include <png.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

namespace skelimg {

namespace {

struct FileCloser
{
   void operator()(FILE* f) const noexcept { std::fclose(f); }
};

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               const std::vector<uint8_t>& pixels)
{
   std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
   if(!fp) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
   png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
   png_infop info = png ? png_create_info_struct(png) : nullptr;
   if(!png || !info) {
      png_destroy_write_struct(&png, nullptr);
      throw IoError("libpng: out of memory");
   }
   if(setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw IoError(fmt::format("libpng: failed writing '{}'", path.string()));
   }
   const int comps = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
   png_init_io(png, fp.get());
   png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8, color_type,
                PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
   png_write_info(png, info);
   for(int row = 0; row < height; ++row)
      png_write_row(png, pixels.data() + size_t(row) * size_t(width) * size_t(comps));
   png_write_end(png, nullptr);
   png_destroy_write_struct(&png, &info);
}

uint8_t to_byte(double y) { return uint8_t(std::lround(255.0 * std::clamp(y, 0.0, 1.0))); }

constexpr std::array<std::array<uint8_t, 3>, 8> k_palette = {{
    {255, 255, 255}, // torso
    {255, 64, 64},
    {64, 128, 255},
    {255, 200, 0},
    {0, 220, 120},
    {200, 80, 255},
    {0, 220, 220},
    {255, 140, 200},
}};

} // namespace

std::vector<std::filesystem::path> write_channel_pngs(const std::filesystem::path& dir,
                                                      const SkeletonImage& img,
                                                      const std::string& stem)
{
   std::error_code ec;
   std::filesystem::create_directories(dir, ec);
   if(ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
   std::vector<std::filesystem::path> out;
   std::vector<uint8_t> px(img.plane_size());
   for(int c = 0; c < img.channels(); ++c) {
      const auto plane = img.plane(c);
      for(size_t i = 0; i < px.size(); ++i) px[i] = to_byte(plane[i]);
      auto path = dir / fmt::format("{}_ch{}.png", stem, c);
      write_png(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, px);
      out.push_back(std::move(path));
   }
   return out;
}

void write_composite_png(const std::filesystem::path& path, const SkeletonImage& img)
{
   std::vector<uint8_t> px(3 * img.plane_size(), 0);
   for(int c = 0; c < img.channels(); ++c) {
      const auto& col = k_palette[size_t(c) % k_palette.size()];
      const auto plane = img.plane(c);
      for(size_t i = 0; i < plane.size(); ++i)
         for(size_t k = 0; k < 3; ++k)
            px[3 * i + k] = std::max(px[3 * i + k], to_byte(plane[i] * col[k] / 255.0));
   }
   write_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, px);
}

} // namespace skelimg
