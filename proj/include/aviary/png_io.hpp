#pragma once

#include <string>
#include <utility>

#include "aviary/image.hpp"

namespace aviary {

/// Writes an 8-bit PNG (grayscale for 1 channel, RGB for 3). Intensities are
/// quantized with round(v * 255), so a save/load round trip stays within
/// 1/255 of the original values.
void save_png(const Image& img, const std::string& path);

/// Writes an 8-bit RGBA PNG from a 3-channel color image plus a 1-channel
/// alpha image of the same size.
void save_png_rgba(const Image& color, const Image& alpha, const std::string& path);

/// Reads an 8-bit PNG into an Image (1 or 3 channels). Palette images are
/// expanded to RGB and 16-bit samples are reduced to 8. Images carrying an
/// alpha channel are rejected here; use load_png_rgba for those.
/// Throws IoError when the file cannot be opened and DecodeError when the
/// contents are not a decodable PNG.
Image load_png(const std::string& path);

/// Reads any 8-bit PNG into (color, alpha). Formats without alpha get an
/// all-opaque alpha plane; grayscale is replicated into three channels.
std::pair<Image, Image> load_png_rgba(const std::string& path);

}  // namespace aviary
