// 8-bit PNG in/out via libpng. Color images load as sRGB rasters with
// components scaled to [0,1]; masks use 8-bit grayscale with 0=black=background,
// 255=white=foreground and threshold 128 on load. Scalar-field debug dumps use
// little-endian PFM.
#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "glyphforge/core.hpp"

namespace glyphforge {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngGrid {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (rgb)
  std::vector<uint8_t> bytes;
};

inline PngGrid read_png_bytes(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  PngGrid grid;
  grid.width = static_cast<int>(w);
  grid.height = static_cast<int>(h);
  grid.channels = channels;
  grid.bytes.resize(static_cast<size_t>(w) * h * channels);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = grid.bytes.data() + static_cast<size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return grid;
}

inline void write_png_bytes(const std::string& path, int width, int height, int channels,
                            const uint8_t* bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(bytes + static_cast<size_t>(y) * width * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline RasterImage read_image_png(const std::string& path) {
  detail::PngGrid g = detail::read_png_bytes(path);
  RasterImage out(g.width, g.height, ColorSpace::SRGB);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const uint8_t* p = g.bytes.data() + (static_cast<size_t>(y) * g.width + x) * g.channels;
      double* q = out.pixel(x, y);
      if (g.channels == 1) {
        q[0] = q[1] = q[2] = p[0] / 255.0;
      } else {
        q[0] = p[0] / 255.0;
        q[1] = p[1] / 255.0;
        q[2] = p[2] / 255.0;
      }
    }
  return out;
}

inline BinaryMask read_mask_png(const std::string& path) {
  detail::PngGrid g = detail::read_png_bytes(path);
  BinaryMask out(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const uint8_t* p = g.bytes.data() + (static_cast<size_t>(y) * g.width + x) * g.channels;
      int v = g.channels == 1 ? p[0] : (p[0] + p[1] + p[2]) / 3;
      out(x, y) = v >= 128 ? 1 : 0;
    }
  return out;
}

inline void write_image_png(const std::string& path, const RasterImage& img) {
  // Callers convert Lab back with to_srgb() first; io stays independent of
  // color_space.hpp.
  if (img.space() != ColorSpace::SRGB)
    throw InvalidInput("write_image_png expects an sRGB image");
  std::vector<uint8_t> bytes(static_cast<size_t>(img.width()) * img.height() * 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double* p = img.pixel(x, y);
      uint8_t* q = bytes.data() + (static_cast<size_t>(y) * img.width() + x) * 3;
      for (int c = 0; c < 3; ++c)
        q[c] = static_cast<uint8_t>(clamp(std::lround(p[c] * 255.0), 0l, 255l));
    }
  detail::write_png_bytes(path, img.width(), img.height(), 3, bytes.data());
}

inline void write_mask_png(const std::string& path, const BinaryMask& mask) {
  std::vector<uint8_t> bytes(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) bytes[i] = mask.data()[i] ? 255 : 0;
  detail::write_png_bytes(path, mask.width(), mask.height(), 1, bytes.data());
}

// Grayscale portable float map, little-endian (negative scale), rows
// bottom-to-top per the PFM convention.
inline void write_field_pfm(const std::string& path, const ScalarField& field) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  std::string header =
      "Pf\n" + std::to_string(field.width()) + " " + std::to_string(field.height()) + "\n-1.0\n";
  std::fwrite(header.data(), 1, header.size(), fp.get());
  std::vector<float> row(field.width());
  for (int y = field.height() - 1; y >= 0; --y) {
    for (int x = 0; x < field.width(); ++x) row[x] = static_cast<float>(field(x, y));
    std::fwrite(row.data(), sizeof(float), row.size(), fp.get());
  }
}

inline ScalarField read_field_pfm(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  char tag[3] = {0, 0, 0};
  int w = 0, h = 0;
  double scale = 0.0;
  if (std::fscanf(fp.get(), "%2s %d %d %lf", tag, &w, &h, &scale) != 4 ||
      std::strcmp(tag, "Pf") != 0 || w < 1 || h < 1)
    throw IoError("not a grayscale PFM: " + path);
  std::fgetc(fp.get());  // single whitespace after the header
  ScalarField out(w, h);
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {
    if (std::fread(row.data(), sizeof(float), row.size(), fp.get()) != row.size())
      throw IoError("truncated PFM: " + path);
    for (int x = 0; x < w; ++x) out(x, y) = row[x];
  }
  return out;
}

}  // namespace glyphforge
