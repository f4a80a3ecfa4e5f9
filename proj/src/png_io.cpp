/* Copyright 2026 The cosod Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <png.h>
#include <zlib.h>

#include <csetjmp>
#include <cstring>

#include "cosod/error.hpp"
#include "cosod/tensor_io.hpp"

namespace cosod::io {
namespace {

namespace fs = std::filesystem;

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->bytes.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, reader->bytes.data() + reader->offset, length);
  reader->offset += length;
}

void warn_silently(png_structp, png_const_charp) {}

// libpng reports failures through longjmp; state that must survive the jump
// is declared before setjmp.
Plane<std::uint8_t> decode_gray_png(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kDecodeFailure, name + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warn_silently);
  if (png == nullptr) throw Error(ErrorCode::kDecodeFailure, name + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kDecodeFailure, name + ": libpng init failed");
  }

  MemoryReader reader{bytes, 0};
  Plane<std::uint8_t> pixels;
  volatile ErrorCode failure = ErrorCode::kDecodeFailure;
  const char* volatile detail = "corrupt PNG stream";

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(failure, name + ": " + detail);
  }

  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (color_type != PNG_COLOR_TYPE_GRAY) {
    failure = ErrorCode::kWrongColorType;
    detail = "expected an 8-bit grayscale PNG";
    png_error(png, detail);
  }
  if (bit_depth != 8) {
    failure = ErrorCode::kUnsupportedBitDepth;
    detail = "expected an 8-bit grayscale PNG";
    png_error(png, detail);
  }
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  // Interlaced passes each rewrite the full set of rows.
  const int passes = png_get_interlace_type(png, info) != PNG_INTERLACE_NONE ? 7 : 1;
  for (int pass = 0; pass < passes; ++pass) {
    for (png_uint_32 y = 0; y < height; ++y) {
      png_read_row(png, pixels.data() + static_cast<std::size_t>(y) * width, nullptr);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return pixels;
}

void append_be32(std::uint32_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void append_chunk(const char type[4], std::span<const std::uint8_t> data, std::vector<std::uint8_t>& out) {
  append_be32(static_cast<std::uint32_t>(data.size()), out);
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  append_be32(static_cast<std::uint32_t>(crc), out);
}

}  // namespace

Plane<std::uint8_t> read_gray_png(const fs::path& path) {
  return decode_gray_png(read_file_bytes(path), path.string());
}

BinaryMask read_mask_png(const fs::path& path) {
  return read_gray_png(path) >= std::uint8_t{128};
}

FloatPlane read_prediction_png(const fs::path& path) {
  return read_gray_png(path).cast<float>() / 255.0f;
}

std::vector<std::uint8_t> encode_gray_png(const Plane<std::uint8_t>& pixels) {
  const auto height = static_cast<std::uint32_t>(pixels.rows());
  const auto width = static_cast<std::uint32_t>(pixels.cols());
  if (height == 0 || width == 0) throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty image");

  // Raw scanlines: filter byte 0 followed by the row.
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height) * (width + 1));
  for (std::uint32_t y = 0; y < height; ++y) {
    raw.push_back(0);
    const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * width;
    raw.insert(raw.end(), row, row + width);
  }

  // zlib stream of stored blocks (max 65535 bytes each).
  std::vector<std::uint8_t> zdata = {0x78, 0x01};
  std::size_t offset = 0;
  do {
    const std::size_t len = std::min<std::size_t>(65535, raw.size() - offset);
    const bool final_block = offset + len == raw.size();
    zdata.push_back(final_block ? 1 : 0);
    zdata.push_back(static_cast<std::uint8_t>(len));
    zdata.push_back(static_cast<std::uint8_t>(len >> 8));
    zdata.push_back(static_cast<std::uint8_t>(~len));
    zdata.push_back(static_cast<std::uint8_t>((~len) >> 8));
    zdata.insert(zdata.end(), raw.begin() + static_cast<std::ptrdiff_t>(offset),
                 raw.begin() + static_cast<std::ptrdiff_t>(offset + len));
    offset += len;
  } while (offset < raw.size());
  append_be32(static_cast<std::uint32_t>(adler32(1L, raw.data(), static_cast<uInt>(raw.size()))), zdata);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  append_be32(width, ihdr);
  append_be32(height, ihdr);
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // depth 8, gray, deflate, no filter, no interlace
  append_chunk("IHDR", ihdr, out);
  append_chunk("IDAT", zdata, out);
  append_chunk("IEND", {}, out);
  return out;
}

void write_gray_png(const Plane<std::uint8_t>& pixels, const fs::path& path) {
  write_file_bytes(encode_gray_png(pixels), path);
}

void write_mask_png(const BinaryMask& mask, const fs::path& path) {
  const Plane<std::uint8_t> pixels = mask.select(Plane<std::uint8_t>::Constant(mask.rows(), mask.cols(), 255),
                                                 Plane<std::uint8_t>::Zero(mask.rows(), mask.cols()));
  write_gray_png(pixels, path);
}

}  // namespace cosod::io
