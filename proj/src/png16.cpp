// Copyright (c) the plcloud authors
// SPDX-License-Identifier: Apache-2.0
//
// In-memory 16-bit grayscale PNG codec on top of libpng.
#include <png.h>

#include <cstring>
#include <vector>

#include "plc/depthmap.hpp"
#include "plc/error.hpp"

namespace plc {

namespace {

struct MemReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t count) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + count > r->size) {
    png_error(png, "read past end of buffer");
    return;
  }
  std::memcpy(out, r->data + r->pos, count);
  r->pos += count;
}

void write_callback(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

void flush_callback(png_structp) {}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

}  // namespace

Png16 read_png16(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw_error(Errc::IoError, "not a PNG stream");

  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw_error(Errc::IoError, "png_create_read_struct failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw_error(Errc::IoError, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(g.png))) throw_error(Errc::IoError, "corrupt PNG stream");

  MemReader reader{bytes.data(), bytes.size()};
  png_set_read_fn(g.png, &reader, read_callback);
  png_read_info(g.png, g.info);

  const int bit_depth = png_get_bit_depth(g.png, g.info);
  const int color_type = png_get_color_type(g.png, g.info);
  if (color_type != PNG_COLOR_TYPE_GRAY)
    throw_error(Errc::NotSingleChannel,
                "expected grayscale, got color type " + std::to_string(color_type));
  if (bit_depth != 16)
    throw_error(Errc::UnsupportedBitDepth,
                "expected 16-bit, got " + std::to_string(bit_depth) + "-bit");

  // PNG stores 16-bit samples big-endian
  png_set_swap(g.png);

  Png16 img;
  img.width = static_cast<int>(png_get_image_width(g.png, g.info));
  img.height = static_cast<int>(png_get_image_height(g.png, g.info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);

  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<std::size_t>(y)] =
        reinterpret_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width);
  png_read_image(g.png, rows.data());
  png_read_end(g.png, nullptr);
  return img;
}

std::vector<std::uint8_t> write_png16(const Png16& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw_error(Errc::InvalidArgument, "inconsistent image dimensions");

  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw_error(Errc::IoError, "png_create_write_struct failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw_error(Errc::IoError, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(g.png))) throw_error(Errc::IoError, "PNG encode failed");

  std::vector<std::uint8_t> out;
  png_set_write_fn(g.png, &out, write_callback, flush_callback);
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  png_set_swap(g.png);

  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y)
    rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(image.pixels.data() + static_cast<std::size_t>(y) * image.width));
  png_write_image(g.png, rows.data());
  png_write_end(g.png, nullptr);
  return out;
}

}  // namespace plc
