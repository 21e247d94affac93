#pragma once

// Independent geometric predicates for the twelve formation layouts. These
// check place_formation output from first principles (collinearity, mirror
// symmetry, hulls, scatter moments) and deliberately avoid reusing any of the
// generator's internals beyond the documented FormationGeometry angles.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "aviary/flocksynth.hpp"

namespace oracles {

using aviary::FormationGeometry;
using aviary::FormationKind;
using aviary::Vec2;

constexpr double kEps = 1e-6;
constexpr double kDeg = 3.141592653589793238462643 / 180.0;

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline bool collinear_at_angle(const std::vector<Vec2>& pts, double angle_rad, double eps) {
  const Vec2 dir{std::cos(angle_rad), std::sin(angle_rad)};
  for (const auto& p : pts) {
    // perpendicular distance of p from the line through the centroid (origin)
    if (std::fabs(cross(dir, p)) > eps * std::max(1.0, std::hypot(p.x, p.y))) return false;
  }
  return true;
}

inline bool consecutive_gaps_equal(const std::vector<Vec2>& pts, double spacing, double eps) {
  std::vector<Vec2> sorted = pts;
  std::sort(sorted.begin(), sorted.end(), [](const Vec2& a, const Vec2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double gap = std::hypot(sorted[i + 1].x - sorted[i].x, sorted[i + 1].y - sorted[i].y);
    if (std::fabs(gap - spacing) > eps * spacing) return false;
  }
  return true;
}

/// Splits arm points of a V-like shape: apex = point with extreme x, arms are
/// the points above / below the travel axis through the apex.
struct VDecomposition {
  Vec2 apex;
  std::vector<Vec2> upper, lower;  // relative to the apex
  bool ok = false;
};

inline VDecomposition decompose_v(const std::vector<Vec2>& pts, bool apex_leads) {
  VDecomposition d;
  auto cmp = [&](const Vec2& a, const Vec2& b) { return a.x < b.x; };
  const auto it = apex_leads ? std::max_element(pts.begin(), pts.end(), cmp)
                             : std::min_element(pts.begin(), pts.end(), cmp);
  d.apex = *it;
  for (const auto& p : pts) {
    if (&p == &*it) continue;
    const Vec2 rel{p.x - d.apex.x, p.y - d.apex.y};
    if (std::fabs(rel.y) < kEps) return d;  // arm points must leave the axis
    (rel.y > 0 ? d.upper : d.lower).push_back(rel);
  }
  auto by_len = [](const Vec2& a, const Vec2& b) {
    return std::hypot(a.x, a.y) < std::hypot(b.x, b.y);
  };
  std::sort(d.upper.begin(), d.upper.end(), by_len);
  std::sort(d.lower.begin(), d.lower.end(), by_len);
  d.ok = true;
  return d;
}

inline bool arm_on_line(const std::vector<Vec2>& arm, double angle_from_axis, bool trailing,
                        double spacing) {
  // arm points must sit at i*spacing along a ray at +-angle off the -x (trailing)
  // or +x (leading) direction
  for (std::size_t i = 0; i < arm.size(); ++i) {
    const double r = (i + 1) * spacing;
    const double x = (trailing ? -1.0 : 1.0) * r * std::cos(angle_from_axis);
    const double y = std::fabs(arm[i].y) / arm[i].y * r * std::sin(angle_from_axis);
    if (std::hypot(arm[i].x - x, arm[i].y - y) > 1e-5 * r) return false;
  }
  return true;
}

inline bool mirror_symmetric_pairs(const std::vector<Vec2>& upper,
                                   const std::vector<Vec2>& lower) {
  const std::size_t paired = std::min(upper.size(), lower.size());
  for (std::size_t i = 0; i < paired; ++i) {
    if (std::hypot(upper[i].x - lower[i].x, upper[i].y + lower[i].y) >
        kEps * std::max(1.0, std::hypot(upper[i].x, upper[i].y))) {
      return false;
    }
  }
  return true;
}

inline bool check_v(const std::vector<Vec2>& pts, double spacing, const FormationGeometry& g,
                    bool apex_leads) {
  auto d = decompose_v(pts, apex_leads);
  if (!d.ok) return false;
  if (d.upper.empty() || d.lower.empty()) return false;
  if (std::llabs(static_cast<long long>(d.upper.size()) -
                 static_cast<long long>(d.lower.size())) > 1) {
    return false;
  }
  const double theta = g.arm_angle_deg * kDeg;
  return arm_on_line(d.upper, theta, apex_leads, spacing) &&
         arm_on_line(d.lower, theta, apex_leads, spacing) &&
         mirror_symmetric_pairs(d.upper, d.lower);
}

inline bool check_j(const std::vector<Vec2>& pts, double spacing, const FormationGeometry& g,
                    bool inverted) {
  auto d = decompose_v(pts, /*apex_leads=*/true);
  if (!d.ok) return false;
  const auto& long_arm = inverted ? d.lower : d.upper;
  const auto& short_arm = inverted ? d.upper : d.lower;
  if (long_arm.empty() || short_arm.empty()) return false;
  const double ratio =
      static_cast<double>(short_arm.size()) / static_cast<double>(long_arm.size());
  if (ratio > 0.5 + kEps) return false;
  const double theta = g.arm_angle_deg * kDeg;
  return arm_on_line(long_arm, theta, true, spacing) &&
         arm_on_line(short_arm, theta, true, spacing);
}

/// All points in strictly convex position on a closed ring.
inline bool check_closed_convex(const std::vector<Vec2>& pts) {
  std::vector<Vec2> ordered = pts;
  std::sort(ordered.begin(), ordered.end(), [](const Vec2& a, const Vec2& b) {
    return std::atan2(a.y, a.x) < std::atan2(b.y, b.x);
  });
  const std::size_t n = ordered.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ordered[i];
    const Vec2& b = ordered[(i + 1) % n];
    const Vec2& c = ordered[(i + 2) % n];
    const Vec2 ab{b.x - a.x, b.y - a.y};
    const Vec2 bc{c.x - b.x, c.y - b.y};
    if (cross(ab, bc) <= 0) return false;  // must keep turning the same way
  }
  return true;
}

struct ScatterMoments {
  double std_x = 0, std_y = 0;
};

inline ScatterMoments scatter_moments(const std::vector<Vec2>& pts) {
  double mx = 0, my = 0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    sx += (p.x - mx) * (p.x - mx);
    sy += (p.y - my) * (p.y - my);
  }
  return {std::sqrt(sx / pts.size()), std::sqrt(sy / pts.size())};
}

inline bool check_branched_v(const std::vector<Vec2>& pts, double spacing,
                             const FormationGeometry& g) {
  // apex is the extreme-x point; main arms live on the two +-arm_angle rays,
  // the branch is whatever is left and must be collinear, anchored on an arm.
  auto cmp = [](const Vec2& a, const Vec2& b) { return a.x < b.x; };
  const Vec2 apex = *std::max_element(pts.begin(), pts.end(), cmp);
  const double theta = g.arm_angle_deg * kDeg;
  const Vec2 up_dir{-std::cos(theta), std::sin(theta)};
  const Vec2 down_dir{-std::cos(theta), -std::sin(theta)};
  std::vector<Vec2> arm_pts, branch;
  for (const auto& p : pts) {
    const Vec2 rel{p.x - apex.x, p.y - apex.y};
    if (std::hypot(rel.x, rel.y) < kEps) continue;  // the apex itself
    const double r = std::hypot(rel.x, rel.y);
    const bool on_up = std::fabs(cross(up_dir, rel)) < 1e-5 * r &&
                       rel.x * up_dir.x + rel.y * up_dir.y > 0;
    const bool on_down = std::fabs(cross(down_dir, rel)) < 1e-5 * r &&
                         rel.x * down_dir.x + rel.y * down_dir.y > 0;
    if (on_up || on_down) {
      arm_pts.push_back(rel);
    } else {
      branch.push_back(rel);
    }
  }
  if (branch.empty() || arm_pts.empty()) return false;
  // branch must be collinear
  std::sort(branch.begin(), branch.end(), [&](const Vec2& a, const Vec2& b) {
    return std::hypot(a.x, a.y) < std::hypot(b.x, b.y);
  });
  const Vec2 anchor_to_first = branch[0];
  for (std::size_t i = 1; i < branch.size(); ++i) {
    const Vec2 d0{branch[i].x - branch[0].x, branch[i].y - branch[0].y};
    // all successive branch points continue along one direction
    const double r = std::hypot(d0.x, d0.y);
    if (r > kEps) {
      const Vec2 step{branch[1].x - branch[0].x, branch[1].y - branch[0].y};
      if (branch.size() > 1 && std::fabs(cross(step, d0)) > 1e-5 * std::max(1.0, r)) return false;
    }
  }
  // the branch root must sit within one spacing of some main-arm point
  double best = 1e100;
  for (const auto& a : arm_pts) {
    best = std::min(best, std::hypot(anchor_to_first.x - a.x, anchor_to_first.y - a.y));
  }
  return best < spacing * (1.0 + 1e-6);
}

inline bool satisfies(FormationKind kind, const std::vector<Vec2>& pts, double spacing,
                      const FormationGeometry& g) {
  switch (kind) {
    case FormationKind::Column:
      return collinear_at_angle(pts, 0.0, kEps) && consecutive_gaps_equal(pts, spacing, kEps);
    case FormationKind::Front:
      return collinear_at_angle(pts, 90.0 * kDeg, kEps) &&
             consecutive_gaps_equal(pts, spacing, kEps);
    case FormationKind::Echelon:
      return collinear_at_angle(pts, -g.arm_angle_deg * kDeg, kEps) &&
             consecutive_gaps_equal(pts, spacing, kEps) &&
             !collinear_at_angle(pts, 0.0, kEps) && !collinear_at_angle(pts, 90.0 * kDeg, kEps);
    case FormationKind::V:
      return check_v(pts, spacing, g, /*apex_leads=*/true);
    case FormationKind::InvertedV:
      return check_v(pts, spacing, g, /*apex_leads=*/false);
    case FormationKind::J:
      return check_j(pts, spacing, g, false);
    case FormationKind::InvertedJ:
      return check_j(pts, spacing, g, true);
    case FormationKind::ClosedLine:
      return check_closed_convex(pts);
    case FormationKind::BranchedV:
      return check_branched_v(pts, spacing, g);
    case FormationKind::GlobularCluster: {
      const auto m = scatter_moments(pts);
      const double ratio = m.std_x / m.std_y;
      return ratio >= 0.8 && ratio <= 1.25;
    }
    case FormationKind::FrontCluster: {
      const auto m = scatter_moments(pts);
      return m.std_y / m.std_x >= 2.0;  // elongated perpendicular to travel
    }
    case FormationKind::ExtendedCluster: {
      const auto m = scatter_moments(pts);
      return m.std_x / m.std_y >= 2.0;  // elongated along travel
    }
  }
  return false;
}

}  // namespace oracles
