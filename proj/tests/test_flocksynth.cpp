#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "aviary/errors.hpp"
#include "aviary/flocksynth.hpp"
#include "support/geometry_oracles.hpp"
#include "support/test_util.hpp"

using namespace aviary;

TEST_CASE("Column positions are collinear with exact gaps") {
  const auto pts = place_formation(FormationKind::Column, 5, 40.0);
  REQUIRE(pts.size() == 5);
  CHECK(oracles::collinear_at_angle(pts, 0.0, 1e-9));
  CHECK(oracles::consecutive_gaps_equal(pts, 40.0, 1e-9));
}

TEST_CASE("Front is perpendicular to travel") {
  const auto pts = place_formation(FormationKind::Front, 4, 25.0);
  REQUIRE(pts.size() == 4);
  CHECK(oracles::collinear_at_angle(pts, 90.0 * oracles::kDeg, 1e-9));
  CHECK(oracles::consecutive_gaps_equal(pts, 25.0, 1e-9));
}

TEST_CASE("V of 7 has mirror-symmetric arms of 3 around a leading apex") {
  const auto pts = place_formation(FormationKind::V, 7, 30.0);
  auto d = oracles::decompose_v(pts, true);
  REQUIRE(d.ok);
  CHECK(d.upper.size() == 3);
  CHECK(d.lower.size() == 3);
  CHECK(oracles::mirror_symmetric_pairs(d.upper, d.lower));
}

TEST_CASE("every kind satisfies its geometric predicate across counts") {
  const FormationGeometry g;
  for (int k = 0; k < kFormationCount; ++k) {
    const auto kind = static_cast<FormationKind>(k);
    for (int count : {5, 9, 24, 61, 100}) {
      CAPTURE(to_string(kind));
      CAPTURE(count);
      const auto pts = place_formation(kind, count, 17.0, g);
      REQUIRE(static_cast<int>(pts.size()) == count);
      CHECK(oracles::satisfies(kind, pts, 17.0, g));
      // centered
      double mx = 0, my = 0;
      for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
      }
      CHECK(std::fabs(mx / count) < 1e-9 * 17.0 * count);
      CHECK(std::fabs(my / count) < 1e-9 * 17.0 * count);
    }
  }
}

TEST_CASE("placement is deterministic") {
  for (int k = 0; k < kFormationCount; ++k) {
    const auto kind = static_cast<FormationKind>(k);
    const auto a = place_formation(kind, 23, 12.0);
    const auto b = place_formation(kind, 23, 12.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x == b[i].x);
      CHECK(a[i].y == b[i].y);
    }
  }
}

TEST_CASE("count below 2 and bad spacing are rejected") {
  CHECK_THROWS_AS(place_formation(FormationKind::V, 1, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(place_formation(FormationKind::V, 5, 0.0), std::invalid_argument);
}

TEST_CASE("flock size bins") {
  CHECK(bin_flock_size(37) == FlockSizeBin::B21_40);
  CHECK(bin_flock_size(5) == FlockSizeBin::B5_20);
  CHECK(bin_flock_size(100) == FlockSizeBin::B81_100);
  CHECK(bin_flock_size(20) == FlockSizeBin::B5_20);
  CHECK(bin_flock_size(21) == FlockSizeBin::B21_40);
  CHECK_THROWS_AS(bin_flock_size(4), std::invalid_argument);
  CHECK_THROWS_AS(bin_flock_size(101), std::invalid_argument);

  // exhaustive: every count maps to exactly one bin; populations 16,20,20,20,20
  int pop[5] = {0, 0, 0, 0, 0};
  for (int c = 5; c <= 100; ++c) ++pop[static_cast<int>(bin_flock_size(c))];
  CHECK(pop[0] == 16);
  CHECK(pop[1] == 20);
  CHECK(pop[2] == 20);
  CHECK(pop[3] == 20);
  CHECK(pop[4] == 20);
}

namespace {

FlockSpec basic_spec(FormationKind kind, int count, double spacing) {
  FlockSpec spec;
  spec.kind = kind;
  spec.count = count;
  spec.spacing = spacing;
  spec.jitter = 0.0;
  spec.heading_deg = 0.0;
  spec.sprite_scale = 1.0;
  spec.seed = 42;
  return spec;
}

}  // namespace

TEST_CASE("rendered sprite clusters count the birds when spacing beats the sprite size") {
  const Sprite sprite = make_bottom_view_sprite(24);
  const RenderOptions options;
  for (int count : {4, 7}) {
    const auto spec = basic_spec(FormationKind::V, count, 60.0);
    const auto sample = render_bottom_view(spec, sprite, 512, 512, options);
    CHECK(sample.label == FormationKind::V);
    const double bg[3] = {options.sky[0], options.sky[1], options.sky[2]};
    CHECK(testutil::connected_components(sample.image, bg) == count);
  }
}

TEST_CASE("same spec and seed render bitwise-identical images") {
  const Sprite sprite = make_bottom_view_sprite(24);
  auto spec = basic_spec(FormationKind::GlobularCluster, 9, 30.0);
  spec.jitter = 4.0;
  spec.heading_deg = 117.0;
  const auto a = render_bottom_view(spec, sprite, 384, 384);
  const auto b = render_bottom_view(spec, sprite, 384, 384);
  CHECK(a.image.data == b.image.data);
  // a different seed moves the jittered birds
  spec.seed = 43;
  CHECK(render_bottom_view(spec, sprite, 384, 384).image.data != a.image.data);
}

TEST_CASE("background pixels carry the exact sky color") {
  const Sprite sprite = make_bottom_view_sprite(24);
  const auto spec = basic_spec(FormationKind::Front, 3, 50.0);
  RenderOptions options;
  options.sky = {0.1, 0.2, 0.9};
  const auto sample = render_bottom_view(spec, sprite, 256, 256, options);
  CHECK(sample.image.at(0, 0, 0) == 0.1);
  CHECK(sample.image.at(0, 0, 1) == 0.2);
  CHECK(sample.image.at(0, 0, 2) == 0.9);
  CHECK(sample.image.at(255, 255, 2) == 0.9);
}

TEST_CASE("a flock that cannot fit reports the required canvas") {
  const Sprite sprite = make_bottom_view_sprite(24);
  const auto spec = basic_spec(FormationKind::Column, 20, 50.0);
  CHECK_THROWS_WITH_AS(render_bottom_view(spec, sprite, 128, 128),
                       doctest::Contains("need at least"), ValidationError);
}

TEST_CASE("render input validation") {
  const Sprite sprite = make_bottom_view_sprite(24);
  auto spec = basic_spec(FormationKind::Column, 4, 40.0);
  spec.jitter = -1.0;
  CHECK_THROWS_AS(render_bottom_view(spec, sprite, 256, 256), std::invalid_argument);
  spec = basic_spec(FormationKind::Column, 4, 40.0);
  spec.heading_deg = 360.0;
  CHECK_THROWS_AS(render_bottom_view(spec, sprite, 256, 256), std::invalid_argument);
  spec = basic_spec(FormationKind::Column, 4, 40.0);
  spec.sprite_scale = 0.0;
  CHECK_THROWS_AS(render_bottom_view(spec, sprite, 256, 256), std::invalid_argument);
}

TEST_CASE("side view altitudes follow the alignment exactly") {
  const Sprite sprite = make_side_view_sprite(24);
  const double bg[3] = {0.42, 0.65, 0.87};

  auto centers_of = [&](VerticalAlignment a, std::uint64_t seed) {
    const auto sample = render_side_view(a, 6, 60.0, 8.0, sprite, 512, 512, 2.0, seed);
    auto centroids = testutil::component_centroids(sample.image, bg);
    std::sort(centroids.begin(), centroids.end(),
              [](const auto& p, const auto& q) { return p.second < q.second; });
    return centroids;
  };

  const auto level = centers_of(VerticalAlignment::Level, 3);
  REQUIRE(level.size() == 6);
  for (std::size_t i = 1; i < level.size(); ++i) {
    CHECK(level[i].first == doctest::Approx(level[0].first).epsilon(0.02));
  }

  const auto asc = centers_of(VerticalAlignment::Ascending, 3);
  REQUIRE(asc.size() == 6);
  for (std::size_t i = 1; i < asc.size(); ++i) {
    CHECK(asc[i].first < asc[i - 1].first - 4.0);  // canvas y shrinks as altitude grows
  }

  const auto desc = centers_of(VerticalAlignment::Descending, 3);
  REQUIRE(desc.size() == 6);
  for (std::size_t i = 1; i < desc.size(); ++i) {
    CHECK(desc[i].first > desc[i - 1].first + 4.0);
  }

  // Descending mirrors Ascending: per-bird centroid y-sums are constant
  const double base = asc[0].first + desc[0].first;
  for (std::size_t i = 1; i < 6; ++i) {
    CHECK(asc[i].first + desc[i].first == doctest::Approx(base).epsilon(0.01));
    CHECK(asc[i].second == doctest::Approx(desc[i].second).epsilon(0.01));
  }
}

TEST_CASE("side view slope validation") {
  const Sprite sprite = make_side_view_sprite(24);
  CHECK_THROWS_AS(render_side_view(VerticalAlignment::Ascending, 4, 40.0, 0.0, sprite, 256, 256),
                  std::invalid_argument);
  // Level ignores the slope entirely
  const auto sample = render_side_view(VerticalAlignment::Level, 4, 40.0, 0.0, sprite, 256, 256);
  CHECK(sample.label == VerticalAlignment::Level);
}

TEST_CASE("sprites: alpha in range, reasonable coverage, names round-trip") {
  for (const Sprite& sp :
       {make_bottom_view_sprite(32), make_side_view_sprite(32), make_aircraft_sprite(32)}) {
    double covered = 0;
    for (double a : sp.alpha.data) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      covered += a > 0.5;
    }
    const double frac = covered / sp.alpha.data.size();
    CHECK(frac > 0.05);
    CHECK(frac < 0.75);
  }
  for (int i = 0; i < kFormationCount; ++i) {
    const auto kind = static_cast<FormationKind>(i);
    CHECK(formation_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(formation_from_string("Blob"), ValidationError);
}
