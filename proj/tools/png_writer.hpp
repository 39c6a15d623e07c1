#pragma once

// 8-bit sRGB-ish PNG output: clamp to [0, 1], gamma 2.2.

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddgi/renderer.hpp"

namespace ddgi_tool {

inline unsigned char tone_map(float linear) {
  const double c = std::clamp(static_cast<double>(linear), 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(std::pow(c, 1.0 / 2.2) * 255.0));
}

namespace detail {
// Kept free of objects with destructors: libpng reports errors through longjmp.
inline bool encode_png(FILE* file, int width, int height, const unsigned char* pixels) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) png_write_row(png, pixels + static_cast<std::size_t>(y) * width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}
}  // namespace detail

inline void write_png(const std::string& path, const ddgi::FrameImage& img) {
  std::vector<unsigned char> pixels(img.rgb.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = tone_map(img.rgb[i]);
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw std::runtime_error("write_png: cannot open " + path);
  if (!detail::encode_png(file.get(), img.width, img.height, pixels.data()))
    throw std::runtime_error("write_png: encoding failed for " + path);
}

}  // namespace ddgi_tool
