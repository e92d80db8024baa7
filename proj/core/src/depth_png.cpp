#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "densedepth/io.hpp"

namespace densedepth::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

constexpr double kDepthScale = 256.0;  // caps encodable depth at 255.99609375 m

}  // namespace

int write_depth_png(const DepthMap& map, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error("cannot open file for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png writer init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png writer init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, map.width(), map.height(), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  int clamped = 0;
  std::vector<std::uint16_t> row(map.width());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      float d = map.at(x, y);
      std::uint16_t v = 0;
      if (std::isfinite(d)) {
        double scaled = std::round(static_cast<double>(d) * kDepthScale);
        if (scaled > 65535.0) {
          scaled = 65535.0;
          ++clamped;
        }
        if (scaled < 0.0) scaled = 0.0;
        // depths under 1/512 m round to 0 and read back invalid; that is the
        // file convention, not a bug.
        v = static_cast<std::uint16_t>(scaled);
      }
      // PNG stores 16-bit samples big-endian.
      row[x] = static_cast<std::uint16_t>((v >> 8) | (v << 8));
    }
    png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return clamped;
}

DepthMap read_depth_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw Error("cannot open file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png reader init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png reader init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("corrupt depth png: " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 16 ||
      png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("depth png must be 16-bit grayscale: " + path.string());
  }
  int width = static_cast<int>(png_get_image_width(png, info));
  int height = static_cast<int>(png_get_image_height(png, info));

  DepthMap map(width, height);
  std::vector<std::uint16_t> row(width);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, reinterpret_cast<png_bytep>(row.data()), nullptr);
    for (int x = 0; x < width; ++x) {
      std::uint16_t be = row[x];
      std::uint16_t v = static_cast<std::uint16_t>((be >> 8) | (be << 8));
      map.at(x, y) = v == 0 ? kInvalidDepth : static_cast<float>(v / kDepthScale);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return map;
}

void write_depth_preview_png(const DepthMap& map, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error("cannot open file for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png writer init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png writer init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, map.width(), map.height(), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  float max_d = 1.0f;
  for (float d : map.data())
    if (std::isfinite(d) && d > max_d) max_d = d;

  std::vector<std::uint8_t> row(static_cast<std::size_t>(map.width()) * 3);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      float d = map.at(x, y);
      std::uint8_t r = 0, g = 0, b = 0;
      if (std::isfinite(d)) {
        float t = std::sqrt(std::min(1.0f, d / max_d));  // near = warm
        r = static_cast<std::uint8_t>(255.0f * (1.0f - t));
        g = static_cast<std::uint8_t>(255.0f * (1.0f - std::abs(2.0f * t - 1.0f)));
        b = static_cast<std::uint8_t>(255.0f * t);
      }
      row[3 * x + 0] = r;
      row[3 * x + 1] = g;
      row[3 * x + 2] = b;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace densedepth::io
