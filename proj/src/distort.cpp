#include "aviary/distort.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aviary/errors.hpp"
#include "aviary/rng.hpp"

namespace aviary {

namespace {

constexpr double kPi = 3.141592653589793238462643;

/// Separable Gaussian blur on a single-channel buffer (values stay in place).
void gaussian_blur_inplace(std::vector<double>& buf, int h, int w, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double norm = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    norm += kernel[i + radius];
  }
  for (double& k : kernel) k /= norm;

  std::vector<double> tmp(buf.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = std::clamp(x + i, 0, w - 1);
        acc += kernel[i + radius] * buf[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = std::clamp(y + i, 0, h - 1);
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      buf[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
}

/// Anti-aliased line coverage: 1 inside the core, falling off linearly over
/// one pixel at the edge.
void draw_line(std::vector<double>& mask, int h, int w, double x0, double y0, double x1,
               double y1, double half_width) {
  const double reach = half_width + 1.0;
  const int min_x = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - reach)));
  const int max_x = std::min(w - 1, static_cast<int>(std::ceil(std::max(x0, x1) + reach)));
  const int min_y = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - reach)));
  const int max_y = std::min(h - 1, static_cast<int>(std::ceil(std::max(y0, y1) + reach)));
  const double dx = x1 - x0, dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      double t = len2 > 0.0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double px = x0 + t * dx, py = y0 + t * dy;
      const double dist = std::hypot(x - px, y - py);
      const double cov = std::clamp(half_width + 0.5 - dist, 0.0, 1.0);
      auto& cell = mask[static_cast<std::size_t>(y) * w + x];
      cell = std::max(cell, cov);
    }
  }
}

void draw_disc(std::vector<double>& mask, int h, int w, double cx, double cy, double radius) {
  const double reach = radius + 1.0;
  const int min_x = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int max_x = std::min(w - 1, static_cast<int>(std::ceil(cx + reach)));
  const int min_y = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int max_y = std::min(h - 1, static_cast<int>(std::ceil(cy + reach)));
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      const double dist = std::hypot(x - cx, y - cy);
      const double cov = std::clamp(radius + 0.5 - dist, 0.0, 1.0);
      auto& cell = mask[static_cast<std::size_t>(y) * w + x];
      cell = std::max(cell, cov);
    }
  }
}

/// out = img * (1 - a*mask) + color * a*mask, per channel, clamped.
Image blend_overlay(const Image& img, const std::vector<double>& mask, double alpha,
                    double color) {
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double a = alpha * mask[static_cast<std::size_t>(y) * img.width + x];
      if (a <= 0.0) continue;
      for (int c = 0; c < img.channels; ++c) {
        const double v = img.at(y, x, c) * (1.0 - a) + color * a;
        out.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

void check_level_percent(double level, const char* op) {
  if (level < 0.0 || level > 100.0) {
    throw std::invalid_argument(std::string(op) + ": level must be in [0, 100]");
  }
}

}  // namespace

const char* to_string(DistortionKind k) {
  switch (k) {
    case DistortionKind::Rain: return "rain";
    case DistortionKind::Snow: return "snow";
    case DistortionKind::Noise: return "noise";
    case DistortionKind::Darkness: return "darkness";
  }
  return "?";
}

DistortionKind distortion_from_string(const std::string& s) {
  if (s == "rain") return DistortionKind::Rain;
  if (s == "snow") return DistortionKind::Snow;
  if (s == "noise") return DistortionKind::Noise;
  if (s == "darkness" || s == "brightness") return DistortionKind::Darkness;
  throw ValidationError("unknown distortion kind '" + s + "'");
}

long rain_drop_count(double level, int height, int width, const OverlayCoefficients& coeff) {
  return std::lround(level / 100.0 * coeff.rain_drops_per_pixel * height * width);
}

long snow_flake_count(double level, int height, int width, const OverlayCoefficients& coeff) {
  return std::lround(level / 100.0 * coeff.snow_flakes_per_pixel * height * width);
}

Image apply_rain(const Image& img, double level, std::uint64_t seed,
                 const OverlayCoefficients& coeff) {
  check_level_percent(level, "apply_rain");
  if (img.channels != 3) {
    throw std::invalid_argument("apply_rain: expects a 3-channel image");
  }
  const long drops = rain_drop_count(level, img.height, img.width, coeff);
  if (drops == 0) return img;

  SeededRng rng(seed, 0x5a17);
  const double diagonal = std::hypot(img.height, img.width);
  std::vector<double> mask(img.pixel_count(), 0.0);
  for (long i = 0; i < drops; ++i) {
    const double cx = rng.uniform(0.0, img.width);
    const double cy = rng.uniform(0.0, img.height);
    const double length =
        rng.uniform(coeff.rain_length_min, coeff.rain_length_max) * diagonal;
    const double angle = rng.uniform(coeff.rain_angle_min_deg, coeff.rain_angle_max_deg) *
                         kPi / 180.0;
    const double dx = 0.5 * length * std::cos(angle);
    const double dy = 0.5 * length * std::sin(angle);
    draw_line(mask, img.height, img.width, cx - dx, cy - dy, cx + dx, cy + dy,
              coeff.rain_half_width);
  }
  gaussian_blur_inplace(mask, img.height, img.width, coeff.rain_blur_sigma);
  return blend_overlay(img, mask, coeff.rain_alpha, coeff.rain_gray);
}

Image apply_snow(const Image& img, double level, std::uint64_t seed,
                 const OverlayCoefficients& coeff) {
  check_level_percent(level, "apply_snow");
  if (img.channels != 3) {
    throw std::invalid_argument("apply_snow: expects a 3-channel image");
  }
  const long flakes = snow_flake_count(level, img.height, img.width, coeff);
  if (flakes == 0) return img;

  SeededRng rng(seed, 0x5e0b);
  const double radius_max =
      std::max(coeff.snow_radius_min, coeff.snow_radius_max_frac * std::min(img.height, img.width));
  std::vector<double> mask(img.pixel_count(), 0.0);
  for (long i = 0; i < flakes; ++i) {
    const double cx = rng.uniform(0.0, img.width);
    const double cy = rng.uniform(0.0, img.height);
    const double radius = rng.uniform(coeff.snow_radius_min, radius_max);
    draw_disc(mask, img.height, img.width, cx, cy, radius);
  }
  gaussian_blur_inplace(mask, img.height, img.width, coeff.snow_blur_sigma);
  const double alpha =
      coeff.snow_alpha_min + level / 100.0 * (coeff.snow_alpha_max - coeff.snow_alpha_min);
  return blend_overlay(img, mask, alpha, 1.0);
}

Image apply_noise(const Image& img, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) {
    throw std::invalid_argument("apply_noise: sigma must be >= 0");
  }
  if (sigma == 0.0) return img;
  Image out = img;
  SeededRng rng(seed, 0x401e);
  for (double& v : out.data) {
    v = std::clamp(v + rng.normal(0.0, sigma), 0.0, 1.0);
  }
  return out;
}

Image apply_darkness(const Image& img, double factor) {
  if (!(factor > 0.0) || factor > 1.0) {
    throw std::invalid_argument("apply_darkness: factor must be in (0, 1]");
  }
  if (factor == 1.0) return img;
  Image out = img;
  for (double& v : out.data) v *= factor;
  return out;
}

Image apply_distortion(const Image& img, DistortionKind kind, double level, std::uint64_t seed,
                       const OverlayCoefficients& coeff) {
  switch (kind) {
    case DistortionKind::Rain: return apply_rain(img, level, seed, coeff);
    case DistortionKind::Snow: return apply_snow(img, level, seed, coeff);
    case DistortionKind::Noise: return apply_noise(img, level, seed);
    case DistortionKind::Darkness: return apply_darkness(img, level);
  }
  throw std::invalid_argument("apply_distortion: bad kind");
}

std::vector<double> default_sweep_levels(DistortionKind kind) {
  std::vector<double> levels;
  switch (kind) {
    case DistortionKind::Rain:
    case DistortionKind::Snow:
      for (int v = 0; v <= 50; v += 5) levels.push_back(v);
      break;
    case DistortionKind::Noise:
      for (int i = 0; i <= 8; ++i) levels.push_back(0.05 * i);
      break;
    case DistortionKind::Darkness:
      for (int i = 0; i <= 7; ++i) levels.push_back(1.0 - 0.1 * i);
      break;
  }
  return levels;
}

}  // namespace aviary
