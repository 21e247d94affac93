#pragma once

#include <cstddef>
#include <vector>

namespace aviary {

/// H x W x C raster of intensities in [0, 1], row-major, C = 1 or 3.
/// This is the currency every other module trades in; pixels live as
/// normalized doubles in memory and as 8-bit samples on disk.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;  // height * width * channels values

  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t value_count() const { return pixel_count() * channels; }
  bool same_shape(const Image& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }
};

/// Bilinear resize (half-pixel-center convention, edges clamped).
/// Resizing to the source dimensions reproduces the input exactly.
Image resize(const Image& img, int new_h, int new_w);

/// BT.601 luminance (0.299 R + 0.587 G + 0.114 B) written to all three
/// output channels, so grayscale images keep the 3-channel layout that
/// downstream classifiers expect.
Image to_grayscale3(const Image& img);

}  // namespace aviary
