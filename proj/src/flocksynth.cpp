#include "aviary/flocksynth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aviary/errors.hpp"
#include "aviary/png_io.hpp"
#include "aviary/rng.hpp"

namespace aviary {

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kDeg = kPi / 180.0;

const char* const kFormationNames[kFormationCount] = {
    "Column",       "Front",        "Echelon",      "J",
    "V",            "InvertedJ",    "InvertedV",    "ClosedLine",
    "BranchedV",    "GlobularCluster", "FrontCluster", "ExtendedCluster"};

void center_on_centroid(std::vector<Vec2>& pts) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  for (auto& p : pts) {
    p.x -= mx;
    p.y -= my;
  }
}

/// Gaussian scatter whose per-axis sample std-devs are rescaled to exactly
/// (sigma_x, sigma_y). Draws are keyed on (kind, count) only, which keeps
/// place_formation a pure function of its arguments.
std::vector<Vec2> cluster_scatter(FormationKind kind, int count, double sigma_x, double sigma_y) {
  SeededRng rng(0xF10C5u + static_cast<std::uint64_t>(kind) * 1000003u,
                static_cast<std::uint64_t>(count));
  std::vector<Vec2> pts(count);
  for (auto& p : pts) {
    p.x = rng.truncated_normal(0.0, 1.0, 2.75);
    p.y = rng.truncated_normal(0.0, 1.0, 2.75);
  }
  center_on_centroid(pts);
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += p.x * p.x;
    sy += p.y * p.y;
  }
  sx = std::sqrt(sx / count);
  sy = std::sqrt(sy / count);
  for (auto& p : pts) {
    p.x *= sigma_x / sx;
    p.y *= sigma_y / sy;
  }
  return pts;
}

}  // namespace

const char* to_string(FormationKind k) { return kFormationNames[static_cast<int>(k)]; }

FormationKind formation_from_string(const std::string& s) {
  for (int i = 0; i < kFormationCount; ++i) {
    if (s == kFormationNames[i]) return static_cast<FormationKind>(i);
  }
  throw ValidationError("unknown formation '" + s + "'");
}

std::vector<std::string> formation_names() {
  return std::vector<std::string>(kFormationNames, kFormationNames + kFormationCount);
}

const char* to_string(VerticalAlignment a) {
  switch (a) {
    case VerticalAlignment::Ascending: return "Ascending";
    case VerticalAlignment::Descending: return "Descending";
    case VerticalAlignment::Level: return "Level";
  }
  return "?";
}

VerticalAlignment alignment_from_string(const std::string& s) {
  if (s == "Ascending") return VerticalAlignment::Ascending;
  if (s == "Descending") return VerticalAlignment::Descending;
  if (s == "Level") return VerticalAlignment::Level;
  throw ValidationError("unknown vertical alignment '" + s + "'");
}

std::vector<std::string> alignment_names() { return {"Ascending", "Descending", "Level"}; }

const char* to_string(FlockSizeBin b) {
  switch (b) {
    case FlockSizeBin::B5_20: return "5-20";
    case FlockSizeBin::B21_40: return "21-40";
    case FlockSizeBin::B41_60: return "41-60";
    case FlockSizeBin::B61_80: return "61-80";
    case FlockSizeBin::B81_100: return "81-100";
  }
  return "?";
}

FlockSizeBin size_bin_from_string(const std::string& s) {
  if (s == "5-20") return FlockSizeBin::B5_20;
  if (s == "21-40") return FlockSizeBin::B21_40;
  if (s == "41-60") return FlockSizeBin::B41_60;
  if (s == "61-80") return FlockSizeBin::B61_80;
  if (s == "81-100") return FlockSizeBin::B81_100;
  throw ValidationError("unknown flock size bin '" + s + "'");
}

std::vector<std::string> size_bin_names() {
  return {"5-20", "21-40", "41-60", "61-80", "81-100"};
}

FlockSizeBin bin_flock_size(int count) {
  if (count < 5 || count > 100) {
    throw std::invalid_argument("bin_flock_size: count must be in [5, 100], got " +
                                std::to_string(count));
  }
  if (count <= 20) return FlockSizeBin::B5_20;
  if (count <= 40) return FlockSizeBin::B21_40;
  if (count <= 60) return FlockSizeBin::B41_60;
  if (count <= 80) return FlockSizeBin::B61_80;
  return FlockSizeBin::B81_100;
}

std::vector<Vec2> place_formation(FormationKind kind, int count, double spacing,
                                  const FormationGeometry& g) {
  if (count < 2) {
    throw std::invalid_argument("place_formation: count must be >= 2, got " +
                                std::to_string(count));
  }
  if (spacing <= 0.0) {
    throw std::invalid_argument("place_formation: spacing must be > 0");
  }
  const double theta = g.arm_angle_deg * kDeg;
  const double ct = std::cos(theta), st = std::sin(theta);
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(count));

  switch (kind) {
    case FormationKind::Column:
      for (int i = 0; i < count; ++i) pts.push_back({-i * spacing, 0.0});
      break;
    case FormationKind::Front:
      for (int i = 0; i < count; ++i) pts.push_back({0.0, i * spacing});
      break;
    case FormationKind::Echelon:
      // one oblique line trailing behind the leader
      for (int i = 0; i < count; ++i) pts.push_back({-i * spacing * ct, i * spacing * st});
      break;
    case FormationKind::V:
    case FormationKind::InvertedV: {
      const double dir = (kind == FormationKind::V) ? -1.0 : 1.0;  // arms trail a V's apex
      const int left = (count - 1 + 1) / 2;
      const int right = count - 1 - left;
      pts.push_back({0.0, 0.0});
      for (int i = 1; i <= left; ++i) pts.push_back({dir * i * spacing * ct, i * spacing * st});
      for (int i = 1; i <= right; ++i) pts.push_back({dir * i * spacing * ct, -i * spacing * st});
      break;
    }
    case FormationKind::J:
    case FormationKind::InvertedJ: {
      const int short_n = std::max(1, static_cast<int>(std::floor(g.j_short_arm_ratio * (count - 1))));
      const int long_n = count - 1 - short_n;
      const double side = (kind == FormationKind::J) ? 1.0 : -1.0;
      pts.push_back({0.0, 0.0});
      for (int i = 1; i <= long_n; ++i) pts.push_back({-i * spacing * ct, side * i * spacing * st});
      for (int i = 1; i <= short_n; ++i) pts.push_back({-i * spacing * ct, -side * i * spacing * st});
      break;
    }
    case FormationKind::ClosedLine: {
      // evenly spaced ring whose circumference matches count * spacing
      const double radius = count * spacing / (2.0 * kPi);
      for (int i = 0; i < count; ++i) {
        const double a = 2.0 * kPi * i / count;
        pts.push_back({radius * std::cos(a), radius * std::sin(a)});
      }
      break;
    }
    case FormationKind::BranchedV: {
      const int branch_n = std::max(1, static_cast<int>(std::floor(g.branch_fraction * (count - 1))));
      const int rest = count - 1 - branch_n;
      const int left = (rest + 1) / 2;
      const int right = rest - left;
      pts.push_back({0.0, 0.0});
      for (int i = 1; i <= left; ++i) pts.push_back({-i * spacing * ct, i * spacing * st});
      for (int i = 1; i <= right; ++i) pts.push_back({-i * spacing * ct, -i * spacing * st});
      // side arm anchored at the middle of the left main arm
      const int anchor = std::max(1, left / 2);
      const Vec2 base{-anchor * spacing * ct, anchor * spacing * st};
      const double phi = g.branch_angle_deg * kDeg;
      for (int i = 1; i <= branch_n; ++i) {
        pts.push_back({base.x - i * spacing * std::cos(phi), base.y + i * spacing * std::sin(phi)});
      }
      break;
    }
    case FormationKind::GlobularCluster: {
      const double s = g.cluster_sigma_factor * spacing;
      return cluster_scatter(kind, count, s, s);
    }
    case FormationKind::FrontCluster: {
      // elongated perpendicular to travel
      return cluster_scatter(kind, count, g.cluster_minor_factor * spacing,
                             g.cluster_sigma_factor * spacing);
    }
    case FormationKind::ExtendedCluster: {
      // elongated along travel
      return cluster_scatter(kind, count, g.cluster_sigma_factor * spacing,
                             g.cluster_minor_factor * spacing);
    }
  }
  center_on_centroid(pts);
  return pts;
}

namespace {

struct EllipseSpec {
  double cx, cy, a, b, rot_deg;
};
struct TriangleSpec {
  double x0, y0, x1, y1, x2, y2;
};

bool inside_ellipse(const EllipseSpec& e, double x, double y) {
  const double c = std::cos(-e.rot_deg * kDeg), s = std::sin(-e.rot_deg * kDeg);
  const double dx = x - e.cx, dy = y - e.cy;
  const double u = (dx * c - dy * s) / e.a;
  const double v = (dx * s + dy * c) / e.b;
  return u * u + v * v <= 1.0;
}

bool inside_triangle(const TriangleSpec& t, double x, double y) {
  auto cross = [](double ax, double ay, double bx, double by) { return ax * by - ay * bx; };
  const double d0 = cross(t.x1 - t.x0, t.y1 - t.y0, x - t.x0, y - t.y0);
  const double d1 = cross(t.x2 - t.x1, t.y2 - t.y1, x - t.x1, y - t.y1);
  const double d2 = cross(t.x0 - t.x2, t.y0 - t.y2, x - t.x2, y - t.y2);
  const bool has_neg = (d0 < 0) || (d1 < 0) || (d2 < 0);
  const bool has_pos = (d0 > 0) || (d1 > 0) || (d2 > 0);
  return !(has_neg && has_pos);
}

/// Rasterizes a union of primitives given in unit coordinates into a square
/// sprite, 4x4 supersampled coverage as alpha.
Sprite rasterize_sprite(int size_px, const std::vector<EllipseSpec>& ellipses,
                        const std::vector<TriangleSpec>& triangles,
                        const std::array<double, 3>& color) {
  if (size_px < 8) throw std::invalid_argument("sprite size must be >= 8 px");
  Sprite sp;
  sp.color = Image(size_px, size_px, 3);
  sp.alpha = Image(size_px, size_px, 1);
  const int ss = 4;
  for (int y = 0; y < size_px; ++y) {
    for (int x = 0; x < size_px; ++x) {
      int hits = 0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double u = (x + (sx + 0.5) / ss) / size_px;
          const double v = (y + (sy + 0.5) / ss) / size_px;
          bool in = false;
          for (const auto& e : ellipses) {
            if (inside_ellipse(e, u, v)) {
              in = true;
              break;
            }
          }
          if (!in) {
            for (const auto& t : triangles) {
              if (inside_triangle(t, u, v)) {
                in = true;
                break;
              }
            }
          }
          if (in) ++hits;
        }
      }
      const double a = static_cast<double>(hits) / (ss * ss);
      sp.alpha.at(y, x, 0) = a;
      sp.color.at(y, x, 0) = color[0];
      sp.color.at(y, x, 1) = color[1];
      sp.color.at(y, x, 2) = color[2];
    }
  }
  return sp;
}

}  // namespace

Sprite make_bottom_view_sprite(int size_px) {
  // Wings-spread silhouette, head toward +x (sprite right).
  std::vector<EllipseSpec> ellipses = {
      {0.52, 0.50, 0.23, 0.075, 0.0},   // body
      {0.76, 0.50, 0.065, 0.050, 0.0},  // head
      {0.46, 0.295, 0.21, 0.055, 24.0},  // upper wing, swept back
      {0.46, 0.705, 0.21, 0.055, -24.0}, // lower wing
  };
  std::vector<TriangleSpec> triangles = {
      {0.33, 0.44, 0.33, 0.56, 0.14, 0.50},  // tail fan
  };
  return rasterize_sprite(size_px, ellipses, triangles, {0.13, 0.14, 0.16});
}

Sprite make_side_view_sprite(int size_px) {
  std::vector<EllipseSpec> ellipses = {
      {0.48, 0.58, 0.23, 0.095, 0.0},  // body
      {0.71, 0.47, 0.075, 0.065, 0.0}, // head
  };
  std::vector<TriangleSpec> triangles = {
      {0.77, 0.44, 0.77, 0.51, 0.90, 0.475},  // beak
      {0.38, 0.54, 0.60, 0.54, 0.33, 0.22},   // raised wing
      {0.29, 0.54, 0.29, 0.64, 0.10, 0.61},   // tail
  };
  return rasterize_sprite(size_px, ellipses, triangles, {0.15, 0.15, 0.16});
}

Sprite make_aircraft_sprite(int size_px) {
  std::vector<EllipseSpec> ellipses = {
      {0.52, 0.50, 0.32, 0.055, 0.0},  // fuselage
      {0.55, 0.50, 0.055, 0.30, 0.0},  // main wings
      {0.26, 0.50, 0.035, 0.13, 0.0},  // tail plane
  };
  std::vector<TriangleSpec> triangles = {
      {0.80, 0.46, 0.80, 0.54, 0.89, 0.50},  // nose
  };
  return rasterize_sprite(size_px, ellipses, triangles, {0.78, 0.79, 0.81});
}

Sprite load_sprite(const std::string& png_path) {
  auto [color, alpha] = load_png_rgba(png_path);
  return Sprite{std::move(color), std::move(alpha)};
}

void composite_sprite(Image& canvas, const Sprite& sprite, double cx, double cy, double rot_deg,
                      double scale) {
  const double half = sprite.alpha.width * 0.5;
  const double reach = half * scale * 1.41421356237 + 1.0;
  const int min_x = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int max_x = std::min(canvas.width - 1, static_cast<int>(std::ceil(cx + reach)));
  const int min_y = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int max_y = std::min(canvas.height - 1, static_cast<int>(std::ceil(cy + reach)));
  const double c = std::cos(-rot_deg * kDeg), s = std::sin(-rot_deg * kDeg);
  const int sw = sprite.alpha.width, sh = sprite.alpha.height;

  auto sample = [&](const Image& im, double sx, double sy, int ch) -> double {
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const double fx = sx - x0, fy = sy - y0;
    double acc = 0.0;
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const int xx = x0 + dx, yy = y0 + dy;
        if (xx < 0 || xx >= sw || yy < 0 || yy >= sh) continue;  // outside: contributes 0
        const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
        acc += w * im.at(yy, xx, ch);
      }
    }
    return acc;
  };

  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      const double dx = x - cx, dy = y - cy;
      // canvas y grows downward; rotate back into sprite space
      const double sx = (dx * c - dy * s) / scale + sw * 0.5 - 0.5;
      const double sy = (dx * s + dy * c) / scale + sh * 0.5 - 0.5;
      if (sx < -1.0 || sx > sw || sy < -1.0 || sy > sh) continue;
      const double a = sample(sprite.alpha, sx, sy, 0);
      if (a <= 0.0) continue;
      for (int ch = 0; ch < 3; ++ch) {
        const double col = sample(sprite.color, sx, sy, ch);
        canvas.at(y, x, ch) = canvas.at(y, x, ch) * (1.0 - a) + col * a;
      }
    }
  }
}

namespace {

double sprite_reach(const Sprite& sprite, double scale) {
  return sprite.alpha.width * 0.5 * scale * 1.41421356237 + 1.0;
}

void check_fit(const std::vector<Vec2>& centers, double reach, int canvas_h, int canvas_w,
               const char* op) {
  double max_abs_x = 0.0, max_abs_y = 0.0;
  for (const auto& p : centers) {
    max_abs_x = std::max(max_abs_x, std::fabs(p.x));
    max_abs_y = std::max(max_abs_y, std::fabs(p.y));
  }
  const double need_w = 2.0 * (max_abs_x + reach);
  const double need_h = 2.0 * (max_abs_y + reach);
  if (need_w > canvas_w || need_h > canvas_h) {
    throw ValidationError(std::string(op) + ": canvas too small, need at least " +
                          std::to_string(static_cast<int>(std::ceil(need_h))) + "x" +
                          std::to_string(static_cast<int>(std::ceil(need_w))) + " px, have " +
                          std::to_string(canvas_h) + "x" + std::to_string(canvas_w));
  }
}

}  // namespace

BottomViewSample render_bottom_view(const FlockSpec& spec, const Sprite& sprite, int canvas_h,
                                    int canvas_w, const RenderOptions& options) {
  if (spec.jitter < 0.0) throw std::invalid_argument("render_bottom_view: jitter must be >= 0");
  if (spec.heading_deg < 0.0 || spec.heading_deg >= 360.0) {
    throw std::invalid_argument("render_bottom_view: heading must be in [0, 360)");
  }
  if (spec.sprite_scale <= 0.0) {
    throw std::invalid_argument("render_bottom_view: sprite_scale must be > 0");
  }
  auto positions = place_formation(spec.kind, spec.count, spec.spacing, options.geometry);

  SeededRng rng(spec.seed, 0xB07703);
  const double hc = std::cos(spec.heading_deg * kDeg);
  const double hs = std::sin(spec.heading_deg * kDeg);
  std::vector<Vec2> centers(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double jx = positions[i].x + rng.truncated_normal(0.0, spec.jitter, 3.0);
    const double jy = positions[i].y + rng.truncated_normal(0.0, spec.jitter, 3.0);
    // screen rotation by heading; composite_sprite turns the sprite nose to
    // (cos h, sin h) as well, so birds face the travel direction
    centers[i] = Vec2{jx * hc - jy * hs, jx * hs + jy * hc};
  }
  const double reach = sprite_reach(sprite, spec.sprite_scale);
  check_fit(centers, reach, canvas_h, canvas_w, "render_bottom_view");

  Image canvas(canvas_h, canvas_w, 3);
  for (int y = 0; y < canvas_h; ++y) {
    for (int x = 0; x < canvas_w; ++x) {
      canvas.at(y, x, 0) = options.sky[0];
      canvas.at(y, x, 1) = options.sky[1];
      canvas.at(y, x, 2) = options.sky[2];
    }
  }
  const double cx0 = canvas_w * 0.5, cy0 = canvas_h * 0.5;
  for (const auto& p : centers) {
    composite_sprite(canvas, sprite, cx0 + p.x, cy0 + p.y, spec.heading_deg, spec.sprite_scale);
  }
  return BottomViewSample{std::move(canvas), spec.kind};
}

SideViewSample render_side_view(VerticalAlignment alignment, int count, double spacing,
                                double slope, const Sprite& sprite, int canvas_h, int canvas_w,
                                double jitter, std::uint64_t seed, double sprite_scale,
                                const RenderOptions& options) {
  if (count < 2) throw std::invalid_argument("render_side_view: count must be >= 2");
  if (spacing <= 0.0) throw std::invalid_argument("render_side_view: spacing must be > 0");
  if (sprite_scale <= 0.0) throw std::invalid_argument("render_side_view: sprite_scale must be > 0");
  if (alignment != VerticalAlignment::Level && slope <= 0.0) {
    throw std::invalid_argument("render_side_view: slope must be > 0 for Ascending/Descending");
  }
  if (jitter < 0.0) throw std::invalid_argument("render_side_view: jitter must be >= 0");

  SeededRng rng(seed, 0x51DE);
  std::vector<Vec2> centers(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = i * spacing + rng.truncated_normal(0.0, jitter, 3.0);
    double altitude = 0.0;
    if (alignment == VerticalAlignment::Ascending) altitude = i * slope;
    if (alignment == VerticalAlignment::Descending) altitude = -(i * slope);
    centers[static_cast<std::size_t>(i)] = Vec2{x, altitude};
  }
  // Descending is by construction the vertical mirror of Ascending.
  double mx = 0.0, my = 0.0;
  for (const auto& p : centers) {
    mx += p.x;
    my += p.y;
  }
  mx /= count;
  my /= count;
  for (auto& p : centers) {
    p.x -= mx;
    p.y -= my;
  }

  const double reach = sprite_reach(sprite, sprite_scale);
  check_fit(centers, reach, canvas_h, canvas_w, "render_side_view");

  Image canvas(canvas_h, canvas_w, 3);
  for (int y = 0; y < canvas_h; ++y) {
    for (int x = 0; x < canvas_w; ++x) {
      canvas.at(y, x, 0) = options.sky[0];
      canvas.at(y, x, 1) = options.sky[1];
      canvas.at(y, x, 2) = options.sky[2];
    }
  }
  const double cx0 = canvas_w * 0.5, cy0 = canvas_h * 0.5;
  for (const auto& p : centers) {
    // altitude up means smaller canvas y
    composite_sprite(canvas, sprite, cx0 + p.x, cy0 - p.y, 0.0, sprite_scale);
  }
  return SideViewSample{std::move(canvas), alignment};
}

}  // namespace aviary
