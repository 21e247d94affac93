#include "aviary/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <csetjmp>
#include <memory>
#include <vector>

#include "aviary/errors.hpp"

namespace aviary {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t quantize(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

void write_png_bytes(const std::vector<std::uint8_t>& bytes, int height, int width,
                     int channels, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("save_png: cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("save_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("save_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("save_png: libpng error while writing '" + path + "'");
  }
  png_init_io(png, fp.get());
  int color_type = PNG_COLOR_TYPE_GRAY;
  if (channels == 3) color_type = PNG_COLOR_TYPE_RGB;
  if (channels == 4) color_type = PNG_COLOR_TYPE_RGBA;
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct DecodedPng {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1, 3 or 4 after transforms
  std::vector<std::uint8_t> bytes;
};

DecodedPng read_png_bytes(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("load_png: cannot open '" + path + "'");

  std::uint8_t header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw DecodeError("load_png: '" + path + "' is not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("load_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("load_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("load_png: malformed PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  // Fold a gray+alpha pair into RGBA so callers only see 1/3/4 channels.
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  DecodedPng out;
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.channels = png_get_channels(png, info);
  if (out.channels != 1 && out.channels != 3 && out.channels != 4) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("load_png: unsupported channel count in '" + path + "'");
  }
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  out.bytes.resize(stride * out.height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void save_png(const Image& img, const std::string& path) {
  if (img.height < 1 || img.width < 1 || (img.channels != 1 && img.channels != 3)) {
    throw std::invalid_argument("save_png: image must be non-empty with 1 or 3 channels");
  }
  std::vector<std::uint8_t> bytes(img.value_count());
  for (std::size_t i = 0; i < img.data.size(); ++i) bytes[i] = quantize(img.data[i]);
  write_png_bytes(bytes, img.height, img.width, img.channels, path);
}

void save_png_rgba(const Image& color, const Image& alpha, const std::string& path) {
  if (color.channels != 3 || alpha.channels != 1 || color.height != alpha.height ||
      color.width != alpha.width) {
    throw std::invalid_argument("save_png_rgba: need 3-channel color + matching 1-channel alpha");
  }
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(color.height) * color.width * 4);
  std::size_t k = 0;
  for (int y = 0; y < color.height; ++y) {
    for (int x = 0; x < color.width; ++x) {
      bytes[k++] = quantize(color.at(y, x, 0));
      bytes[k++] = quantize(color.at(y, x, 1));
      bytes[k++] = quantize(color.at(y, x, 2));
      bytes[k++] = quantize(alpha.at(y, x, 0));
    }
  }
  write_png_bytes(bytes, color.height, color.width, 4, path);
}

Image load_png(const std::string& path) {
  DecodedPng decoded = read_png_bytes(path);
  if (decoded.channels == 4) {
    throw DecodeError("load_png: '" + path + "' carries an alpha channel; use load_png_rgba");
  }
  Image img(decoded.height, decoded.width, decoded.channels);
  for (std::size_t i = 0; i < decoded.bytes.size(); ++i) {
    img.data[i] = decoded.bytes[i] / 255.0;
  }
  return img;
}

std::pair<Image, Image> load_png_rgba(const std::string& path) {
  DecodedPng decoded = read_png_bytes(path);
  Image color(decoded.height, decoded.width, 3);
  Image alpha(decoded.height, decoded.width, 1, 1.0);
  const int ch = decoded.channels;
  std::size_t k = 0;
  for (int y = 0; y < decoded.height; ++y) {
    for (int x = 0; x < decoded.width; ++x) {
      const std::uint8_t* px = decoded.bytes.data() + k;
      if (ch == 1) {
        const double v = px[0] / 255.0;
        color.at(y, x, 0) = color.at(y, x, 1) = color.at(y, x, 2) = v;
      } else {
        color.at(y, x, 0) = px[0] / 255.0;
        color.at(y, x, 1) = px[1] / 255.0;
        color.at(y, x, 2) = px[2] / 255.0;
        if (ch == 4) alpha.at(y, x, 0) = px[3] / 255.0;
      }
      k += ch;
    }
  }
  return {std::move(color), std::move(alpha)};
}

}  // namespace aviary
