#include "aviary/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aviary {

Image::Image(int height, int width, int channels, double fill)
    : height(height), width(width), channels(channels) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("Image: dimensions must be >= 1, got " +
                                std::to_string(height) + "x" + std::to_string(width));
  }
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("Image: channels must be 1 or 3, got " +
                                std::to_string(channels));
  }
  data.assign(value_count(), fill);
}

Image resize(const Image& img, int new_h, int new_w) {
  if (new_h < 1 || new_w < 1) {
    throw std::invalid_argument("resize: target dimensions must be >= 1");
  }
  Image out(new_h, new_w, img.channels);
  const double sy_scale = static_cast<double>(img.height) / new_h;
  const double sx_scale = static_cast<double>(img.width) / new_w;
  for (int oy = 0; oy < new_h; ++oy) {
    const double sy = (oy + 0.5) * sy_scale - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double fy = sy - y0;
    if (y0 < 0) { y0 = 0; fy = 0.0; }
    if (y0 > img.height - 1) { y0 = img.height - 1; fy = 0.0; }
    const int y1 = std::min(y0 + 1, img.height - 1);
    for (int ox = 0; ox < new_w; ++ox) {
      const double sx = (ox + 0.5) * sx_scale - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double fx = sx - x0;
      if (x0 < 0) { x0 = 0; fx = 0.0; }
      if (x0 > img.width - 1) { x0 = img.width - 1; fx = 0.0; }
      const int x1 = std::min(x0 + 1, img.width - 1);
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
        const double bot = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
        out.at(oy, ox, c) = top * (1.0 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Image to_grayscale3(const Image& img) {
  if (img.channels != 3) {
    throw std::invalid_argument("to_grayscale3: input must have 3 channels");
  }
  Image out(img.height, img.width, 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
      v = std::clamp(v, 0.0, 1.0);
      out.at(y, x, 0) = v;
      out.at(y, x, 1) = v;
      out.at(y, x, 2) = v;
    }
  }
  return out;
}

}  // namespace aviary
