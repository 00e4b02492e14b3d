#include "mattefuse/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "mattefuse/errors.hpp"
#include "mattefuse/file_util.hpp"

namespace mattefuse {

namespace {

// libpng reports fatal errors by longjmp. Everything with a non-trivial
// destructor is constructed outside the setjmp-guarded helpers below.
struct PngContext {
  std::jmp_buf jmp;
  char message[256] = {0};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::strncpy(ctx->message, msg, sizeof(ctx->message) - 1);
  std::longjmp(ctx->jmp, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->size) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->data + cur->pos, len);
  cur->pos += len;
}

void write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void flush_noop(png_structp) {}

struct Header {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int channels = 0;
};

bool read_header(png_structp png, png_infop info, PngContext& ctx, Header& hdr) {
  if (setjmp(ctx.jmp)) return false;
  png_read_info(png, info);
  png_uint_32 w = 0, h = 0;
  int depth = 0, color = 0;
  png_get_IHDR(png, info, &w, &h, &depth, &color, nullptr, nullptr, nullptr);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  hdr.width = png_get_image_width(png, info);
  hdr.height = png_get_image_height(png, info);
  hdr.bit_depth = png_get_bit_depth(png, info);
  hdr.color_type = png_get_color_type(png, info);
  hdr.channels = png_get_channels(png, info);
  return true;
}

bool read_rows(png_structp png, PngContext& ctx, png_bytepp rows) {
  if (setjmp(ctx.jmp)) return false;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  return true;
}

bool write_all(png_structp png, png_infop info, PngContext& ctx, const RawPng& raw, png_bytepp rows,
               std::vector<std::uint8_t>* out) {
  if (setjmp(ctx.jmp)) return false;
  png_set_write_fn(png, out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raw.width), static_cast<png_uint_32>(raw.height),
               raw.bit_depth, raw.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_ALL_FILTERS);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

RawPng load_png_raw(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw IoError(path.string() + ": not a PNG file");
  }
  PngContext ctx;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, on_png_error, on_png_warning);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  png_set_read_fn(png, &cursor, read_from_memory);

  Header hdr;
  if (!read_header(png, info, ctx, hdr)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": " + ctx.message);
  }
  if (hdr.channels != 1 && hdr.channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": unsupported channel count " + std::to_string(hdr.channels) +
                  " (expected grayscale or RGB without alpha)");
  }
  if (hdr.bit_depth != 8 && hdr.bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": unsupported bit depth " + std::to_string(hdr.bit_depth));
  }

  const std::size_t bytes_per_sample = hdr.bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = hdr.width * static_cast<std::size_t>(hdr.channels) * bytes_per_sample;
  std::vector<std::uint8_t> pixels(row_bytes * hdr.height);
  std::vector<png_bytep> rows(hdr.height);
  for (png_uint_32 y = 0; y < hdr.height; ++y) rows[y] = pixels.data() + y * row_bytes;

  if (!read_rows(png, ctx, rows.data())) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": " + ctx.message);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  RawPng raw;
  raw.width = static_cast<int>(hdr.width);
  raw.height = static_cast<int>(hdr.height);
  raw.channels = hdr.channels;
  raw.bit_depth = hdr.bit_depth;
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height * raw.channels);
  if (hdr.bit_depth == 16) {
    for (std::size_t i = 0; i < raw.samples.size(); ++i) {
      raw.samples[i] = static_cast<std::uint16_t>((pixels[2 * i] << 8) | pixels[2 * i + 1]);
    }
  } else {
    std::copy(pixels.begin(), pixels.end(), raw.samples.begin());
  }
  return raw;
}

ImageF load_png(const std::filesystem::path& path) {
  const RawPng raw = load_png_raw(path);
  const double scale = raw.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> data(raw.samples.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = raw.samples[i] / scale;
  return ImageF::from_data(raw.width, raw.height, raw.channels, std::move(data));
}

std::vector<std::uint8_t> encode_png_raw(const RawPng& raw) {
  if (raw.bit_depth != 8 && raw.bit_depth != 16) throw ArgumentError("PNG bit depth must be 8 or 16");
  if (raw.channels != 1 && raw.channels != 3) throw ArgumentError("PNG channel count must be 1 or 3");
  const std::size_t bytes_per_sample = raw.bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(raw.width) * raw.channels * bytes_per_sample;
  std::vector<std::uint8_t> pixels(row_bytes * static_cast<std::size_t>(raw.height));
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (raw.bit_depth == 16) {
      pixels[2 * i] = static_cast<std::uint8_t>(raw.samples[i] >> 8);
      pixels[2 * i + 1] = static_cast<std::uint8_t>(raw.samples[i] & 0xff);
    } else {
      pixels[i] = static_cast<std::uint8_t>(raw.samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(raw.height));
  for (int y = 0; y < raw.height; ++y) rows[static_cast<std::size_t>(y)] = pixels.data() + y * row_bytes;

  std::vector<std::uint8_t> out;
  PngContext ctx;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, on_png_error, on_png_warning);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  const bool ok = write_all(png, info, ctx, raw, rows.data(), &out);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw IoError(std::string("PNG encode failed: ") + ctx.message);
  return out;
}

std::vector<std::uint8_t> encode_png(const ImageF& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("PNG bit depth must be 8 or 16");
  RawPng raw;
  raw.width = img.width();
  raw.height = img.height();
  raw.channels = img.channels();
  raw.bit_depth = bit_depth;
  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  raw.samples.resize(img.size());
  const auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::isfinite(src[i]) ? std::clamp(src[i], 0.0, 1.0) : 0.0;
    raw.samples[i] = static_cast<std::uint16_t>(std::lround(v * scale));
  }
  return encode_png_raw(raw);
}

std::vector<std::uint8_t> save_png(const ImageF& img, const std::filesystem::path& path, int bit_depth) {
  std::vector<std::uint8_t> bytes = encode_png(img, bit_depth);
  write_file_atomic(path, bytes);
  return bytes;
}

}  // namespace mattefuse
