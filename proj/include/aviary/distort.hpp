#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aviary/image.hpp"

namespace aviary {

enum class DistortionKind { Rain, Snow, Noise, Darkness };

const char* to_string(DistortionKind k);
DistortionKind distortion_from_string(const std::string& s);

/// Tunable coefficients of the rain/snow overlays. These defaults are
/// documented choices, not physical constants; every one of them can be
/// overridden.
struct OverlayCoefficients {
  double rain_drops_per_pixel = 0.004;   // drops = round(level/100 * coeff * H * W)
  double rain_length_min = 0.06;         // fraction of image diagonal
  double rain_length_max = 0.10;
  double rain_angle_min_deg = 60.0;      // slant, measured from horizontal
  double rain_angle_max_deg = 75.0;
  double rain_gray = 0.78;
  double rain_blur_sigma = 1.0;
  double rain_alpha = 0.5;
  double rain_half_width = 0.6;          // line half-thickness in px

  double snow_flakes_per_pixel = 0.003;
  double snow_radius_min = 1.0;          // px
  double snow_radius_max_frac = 0.01;    // fraction of min(H, W)
  double snow_blur_sigma = 1.5;
  double snow_alpha_min = 0.3;
  double snow_alpha_max = 0.85;
};

/// Thin light-gray slanted streaks, blurred and alpha-blended over the
/// image. level is a percentage in [0, 100]; level 0 returns the input
/// bit for bit.
Image apply_rain(const Image& img, double level, std::uint64_t seed,
                 const OverlayCoefficients& coeff = OverlayCoefficients{});

/// White circular flakes of random radius, blurred, blended with an opacity
/// that grows with level. Same level/seed conventions as apply_rain.
Image apply_snow(const Image& img, double level, std::uint64_t seed,
                 const OverlayCoefficients& coeff = OverlayCoefficients{});

/// Adds iid N(0, sigma^2) to every value and clamps to [0, 1]. sigma 0 is
/// the bitwise identity.
Image apply_noise(const Image& img, double sigma, std::uint64_t seed);

/// Multiplies every value by factor in (0, 1]. factor 1 is the identity.
Image apply_darkness(const Image& img, double factor);

/// Dispatch by kind; darkness ignores the seed.
Image apply_distortion(const Image& img, DistortionKind kind, double level, std::uint64_t seed,
                       const OverlayCoefficients& coeff = OverlayCoefficients{});

/// Number of rain streaks / snow flakes drawn at a given level; exposed so
/// the count formulas are testable on their own.
long rain_drop_count(double level, int height, int width,
                     const OverlayCoefficients& coeff = OverlayCoefficients{});
long snow_flake_count(double level, int height, int width,
                      const OverlayCoefficients& coeff = OverlayCoefficients{});

/// The standard sweep grids (rain/snow 0-50%, sigma 0-0.40, brightness 1.0-0.3).
std::vector<double> default_sweep_levels(DistortionKind kind);

}  // namespace aviary
