#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aviary/image.hpp"

namespace aviary {

/// The twelve bottom-view flock formations.
enum class FormationKind {
  Column,
  Front,
  Echelon,
  J,
  V,
  InvertedJ,
  InvertedV,
  ClosedLine,
  BranchedV,
  GlobularCluster,
  FrontCluster,
  ExtendedCluster,
};
inline constexpr int kFormationCount = 12;
const char* to_string(FormationKind k);
FormationKind formation_from_string(const std::string& s);
std::vector<std::string> formation_names();

/// Side-view vertical alignment of a Column formation.
enum class VerticalAlignment { Ascending, Descending, Level };
const char* to_string(VerticalAlignment a);
VerticalAlignment alignment_from_string(const std::string& s);
std::vector<std::string> alignment_names();

/// Five flock-size bins partitioning counts 5..100.
enum class FlockSizeBin { B5_20, B21_40, B41_60, B61_80, B81_100 };
const char* to_string(FlockSizeBin b);
FlockSizeBin size_bin_from_string(const std::string& s);
std::vector<std::string> size_bin_names();

/// Maps a bird count in [5, 100] to its bin (bins close on the right:
/// 20 -> B5_20, 21 -> B21_40).
FlockSizeBin bin_flock_size(int count);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Shape coefficients of the formation layouts. The twelve formations are
/// conventionally defined only by name, so these defaults are the toolkit's
/// own parameterization, chosen to keep the classes mutually distinguishable
/// under moderate jitter. All of them are overridable.
struct FormationGeometry {
  double arm_angle_deg = 35.0;       // V/J arm angle off the travel axis
  double j_short_arm_ratio = 0.3;    // short-arm share of a J's birds
  double branch_fraction = 0.25;     // birds assigned to the BranchedV side arm
  double branch_angle_deg = 65.0;    // side-arm angle off the travel axis
  double cluster_sigma_factor = 1.5; // major cluster std-dev, in spacings
  double cluster_minor_factor = 0.6; // minor cluster std-dev, in spacings
};

/// Lays out `count` birds of the given formation with the travel axis along
/// +x, centered on the centroid. Deterministic: cluster scatter comes from a
/// generator keyed only on (kind, count), so the same inputs always produce
/// the same layout. Positions are in pixels, nominal neighbor distance
/// `spacing`.
std::vector<Vec2> place_formation(FormationKind kind, int count, double spacing,
                                  const FormationGeometry& geometry = FormationGeometry{});

/// A sprite is a color patch plus an alpha mask of the same size.
struct Sprite {
  Image color;  // 3 channels
  Image alpha;  // 1 channel, coverage in [0, 1]
};

/// Procedurally drawn bird silhouette seen from below (wings spread),
/// facing +x. `size_px` is the square sprite side.
Sprite make_bottom_view_sprite(int size_px = 40);

/// Bird silhouette in profile, facing +x.
Sprite make_side_view_sprite(int size_px = 40);

/// Fixed-wing aircraft silhouette, facing +x. Used for the synthetic
/// aircraft class in cascade/unified corpora.
Sprite make_aircraft_sprite(int size_px = 48);

Sprite load_sprite(const std::string& png_path);

/// Alpha-composites `sprite`, rotated by rot_deg and scaled, with its center
/// at (cx, cy). Sampling is bilinear in sprite space.
void composite_sprite(Image& canvas, const Sprite& sprite, double cx, double cy, double rot_deg,
                      double scale);

/// Everything that determines one bottom-view flock image.
struct FlockSpec {
  FormationKind kind = FormationKind::Column;
  int count = 8;             // >= 2
  double spacing = 18.0;     // px, > 0
  double jitter = 0.0;       // per-bird positional noise std-dev, px
  double heading_deg = 0.0;  // travel direction, [0, 360)
  double sprite_scale = 1.0;
  std::uint64_t seed = 0;
};

struct RenderOptions {
  std::array<double, 3> sky = {0.42, 0.65, 0.87};
  FormationGeometry geometry;
};

struct BottomViewSample {
  Image image;
  FormationKind label;
};

struct SideViewSample {
  Image image;
  VerticalAlignment label;
};

/// Renders the flock onto a sky-colored canvas. Bird positions are the
/// formation layout plus truncated-Gaussian jitter (cut at 3 sigma), rotated
/// by heading and centered on the canvas. Throws ValidationError reporting
/// the required canvas size when a sprite would cross the border.
BottomViewSample render_bottom_view(const FlockSpec& spec, const Sprite& sprite, int canvas_h,
                                    int canvas_w, const RenderOptions& options = RenderOptions{});

/// Side-view Column flock. Bird centers march along +x with spacing; their
/// altitude is strictly increasing (Ascending), strictly decreasing
/// (Descending) or constant (Level), changing by `slope` px per bird.
/// Jitter perturbs the along-track coordinate only, so the altitude pattern
/// stays exact; Descending with a given seed is the vertical mirror of
/// Ascending with the same seed.
SideViewSample render_side_view(VerticalAlignment alignment, int count, double spacing,
                                double slope, const Sprite& sprite, int canvas_h, int canvas_w,
                                double jitter = 0.0, std::uint64_t seed = 0,
                                double sprite_scale = 1.0,
                                const RenderOptions& options = RenderOptions{});

}  // namespace aviary
