#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "acq/error.hpp"
#include "acq/geo/geometry.hpp"
#include "acq/geo/geometry_io.hpp"
#include "acq/geo/spatial_index.hpp"

using namespace acq::geo;

namespace {

PolygonGeom unit_square() { return PolygonGeom::rectangle(0, 0, 1, 1); }

PolygonGeom annulus() {
  Ring outer{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}};
  Ring hole{{3, 3}, {3, 7}, {7, 7}, {7, 3}, {3, 3}};
  return PolygonGeom(outer, {hole});
}

PolygonGeom l_shape() {
  return PolygonGeom(Ring{{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 3}, {0, 3}, {0, 0}});
}

// Independent oracle: cast a ray to +x and count edge crossings across all
// rings, using a half-open vertex rule written separately from the library.
bool ray_cast_oracle(Point p, const std::vector<Ring>& rings) {
  int crossings = 0;
  for (const auto& ring : rings) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Point a = ring[i], b = ring[i + 1];
      const bool straddles = (a.y <= p.y && b.y > p.y) || (b.y <= p.y && a.y > p.y);
      if (!straddles) continue;
      const double t = (p.y - a.y) / (b.y - a.y);
      if (a.x + t * (b.x - a.x) > p.x) ++crossings;
    }
  }
  return crossings % 2 == 1;
}

double segment_oracle(Point p, Point a, Point b) {
  // Dense parametric sampling plus exact endpoints; refined by ternary search.
  double lo = 0.0, hi = 1.0;
  auto at = [&](double t) { return std::hypot(a.x + t * (b.x - a.x) - p.x, a.y + t * (b.y - a.y) - p.y); };
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (at(m1) < at(m2)) hi = m2; else lo = m1;
  }
  return std::min({at(0.0), at(1.0), at((lo + hi) / 2)});
}

PolygonGeom random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-50, 50), r(5, 30), jitter(0, 0.4);
  const Point center{c(rng), c(rng)};
  const double radius = r(rng);
  const int k = 3 + static_cast<int>(rng() % 8);
  Ring ring;
  for (int i = 0; i < k; ++i) {
    const double ang = 2 * std::numbers::pi * (i + jitter(rng)) / k;
    ring.push_back({center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)});
  }
  ring.push_back(ring.front());
  return PolygonGeom(ring);
}

}  // namespace

TEST_CASE("polygon validation") {
  CHECK_THROWS_AS(PolygonGeom(Ring{{0, 0}, {1, 0}, {0, 0}}), acq::GeometryError);
  CHECK_THROWS_AS(PolygonGeom(Ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}}), acq::GeometryError);
  CHECK_THROWS_AS(PolygonGeom(Ring{{0, 0}, {1, 0}, {2, 0}, {0, 0}}), acq::GeometryError);
  CHECK_THROWS_AS(PolygonGeom(Ring{{0, 0}, {NAN, 0}, {1, 1}, {0, 0}}), acq::GeometryError);
  CHECK(unit_square().area() == doctest::Approx(1.0));
  CHECK(annulus().area() == doctest::Approx(84.0));
}

TEST_CASE("point_in_polygon") {
  CHECK(point_in_polygon({0.5, 0.5}, unit_square()));
  CHECK_FALSE(point_in_polygon({2, 2}, unit_square()));
  SUBCASE("boundary counts as inside") {
    CHECK(point_in_polygon({0, 0.5}, unit_square()));
    CHECK(point_in_polygon({1, 1}, unit_square()));
    CHECK(point_in_polygon({3, 5}, annulus()));
  }
  SUBCASE("hole excluded") {
    CHECK_FALSE(point_in_polygon({5, 5}, annulus()));
    CHECK(point_in_polygon({1, 5}, annulus()));
  }
  SUBCASE("matches ray casting off the boundary") {
    const auto g = annulus();
    std::vector<Ring> rings{g.parts()[0].exterior, g.parts()[0].holes[0]};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 12);
    for (int i = 0; i < 2000; ++i) {
      const Point p{u(rng), u(rng)};
      if (point_to_boundary_distance(p, g) < 1e-9) continue;
      CHECK(point_in_polygon(p, g) == ray_cast_oracle(p, rings));
    }
  }
}

TEST_CASE("point_to_polygon_distance") {
  CHECK(point_to_polygon_distance({0.3, 0.6}, unit_square()) == 0.0);
  CHECK(point_to_polygon_distance({-500, 0.5}, unit_square()) == doctest::Approx(500.0));
  CHECK(point_to_polygon_distance({5, 5}, annulus()) == doctest::Approx(2.0));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-120, 120);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_convex(rng);
    const Point p{u(rng), u(rng)};
    const auto& ring = g.parts()[0].exterior;
    double oracle = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
      oracle = std::min(oracle, segment_oracle(p, ring[i], ring[i + 1]));
    const bool inside = ray_cast_oracle(p, {ring});
    const double d = point_to_polygon_distance(p, g);
    if (inside) CHECK(d == 0.0);
    else CHECK(d == doctest::Approx(oracle).epsilon(1e-9));
    // distance is 0 exactly when the point is contained
    CHECK((d == 0.0) == point_in_polygon(p, g));
  }
}

TEST_CASE("distance is translation and rotation invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100, 100), ang(0, 2 * std::numbers::pi);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_convex(rng);
    const Point p{u(rng), u(rng)};
    const double theta = ang(rng);
    const Point shift{u(rng) * 1e4, u(rng) * 1e4};
    auto move = [&](Point q) {
      return Point{q.x * std::cos(theta) - q.y * std::sin(theta) + shift.x,
                   q.x * std::sin(theta) + q.y * std::cos(theta) + shift.y};
    };
    Ring moved;
    for (const auto& q : g.parts()[0].exterior) moved.push_back(move(q));
    moved.back() = moved.front();
    const PolygonGeom h(moved);
    const double d0 = point_to_polygon_distance(p, g);
    const double d1 = point_to_polygon_distance(move(p), h);
    if (d0 == 0.0) continue;
    CHECK(d1 == doctest::Approx(d0).epsilon(1e-9));
  }
}

TEST_CASE("polygon_centroid") {
  const Point c = polygon_centroid(unit_square());
  CHECK(c.x == doctest::Approx(0.5));
  CHECK(c.y == doctest::Approx(0.5));

  const Point t = polygon_centroid(PolygonGeom::rectangle(1e6 + 3, 2e6 - 1, 1e6 + 4, 2e6));
  CHECK(t.x == doctest::Approx(1e6 + 3.5).epsilon(1e-12));
  CHECK(t.y == doctest::Approx(2e6 - 0.5).epsilon(1e-12));

  SUBCASE("L-shape against grid sampling") {
    const auto g = l_shape();
    const int steps = 2000;
    double sx = 0, sy = 0;
    long count = 0;
    for (int i = 0; i < steps; ++i)
      for (int j = 0; j < steps; ++j) {
        const Point p{4.0 * (i + 0.5) / steps, 3.0 * (j + 0.5) / steps};
        const bool in = (p.y < 1.0) || (p.x < 1.0);
        if (!in) continue;
        sx += p.x;
        sy += p.y;
        ++count;
      }
    const Point c2 = polygon_centroid(g);
    CHECK(std::abs(c2.x - sx / count) < 1e-3);
    CHECK(std::abs(c2.y - sy / count) < 1e-3);
  }

  SUBCASE("hole and winding") {
    const Point a = polygon_centroid(annulus());
    CHECK(a.x == doctest::Approx(5.0));
    CHECK(a.y == doctest::Approx(5.0));
    const PolygonGeom cw(Ring{{0, 0}, {0, 2}, {2, 2}, {2, 0}, {0, 0}});
    CHECK(polygon_centroid(cw).x == doctest::Approx(1.0));
  }

  SUBCASE("multi-part combines by area") {
    std::vector<PolygonPart> parts{
        {Ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}, {}},
        {Ring{{10, 0}, {13, 0}, {13, 1}, {10, 1}, {10, 0}}, {}}};
    const Point m = polygon_centroid(PolygonGeom(parts));
    CHECK(m.x == doctest::Approx((0.5 * 1 + 11.5 * 3) / 4));
  }
}

TEST_CASE("polygons_touch") {
  const double tol = 1e-6;
  const auto a = unit_square();
  CHECK(polygons_touch(a, PolygonGeom::rectangle(1, 0, 2, 1), tol));
  CHECK(polygons_touch(a, PolygonGeom::rectangle(1, 1, 2, 2), tol));
  CHECK_FALSE(polygons_touch(a, PolygonGeom::rectangle(1 + 10 * tol, 0, 2, 1), tol));
  CHECK(polygons_touch(a, a, tol));
  // snapped but not bit-identical vertices
  CHECK(polygons_touch(a, PolygonGeom::rectangle(1 + 1e-7, 0, 2, 1), tol));
  // crossing footprints without nearby vertices
  const auto h = PolygonGeom::rectangle(-1, 0.4, 2, 0.6);
  CHECK(polygons_touch(a, h, tol));
  CHECK(polygons_touch(h, a, tol));
  // containment
  CHECK(polygons_touch(annulus(), PolygonGeom::rectangle(1, 1, 2, 2), tol));
}

TEST_CASE("polygon_distance") {
  const auto a = unit_square();
  CHECK(polygon_distance(a, PolygonGeom::rectangle(3, 0, 4, 1)) == doctest::Approx(2.0));
  CHECK(polygon_distance(a, PolygonGeom::rectangle(4, 5, 5, 6)) == doctest::Approx(5.0));
  CHECK(polygon_distance(a, PolygonGeom::rectangle(0.5, 0.5, 3, 3)) == 0.0);
}

TEST_CASE("spatial index") {
  SUBCASE("empty index") {
    SpatialIndex idx;
    CHECK_THROWS_AS(idx.nearest({0, 0}), acq::DataError);
    CHECK(idx.within_radius({0, 0}, 10).empty());
  }
  SUBCASE("single item") {
    SpatialIndex idx({{42, Point{3, 4}}});
    const auto hit = idx.nearest({0, 0});
    CHECK(hit.id == 42);
    CHECK(hit.distance == doctest::Approx(5.0));
  }
  SUBCASE("ties resolve to smallest id") {
    SpatialIndex idx({{9, Point{1, 0}}, {4, Point{-1, 0}}, {7, Point{0, 1}}});
    CHECK(idx.nearest({0, 0}).id == 4);
  }
  SUBCASE("radius zero returns containing polygons") {
    std::vector<SpatialIndex::Item> items;
    for (int i = 0; i < 5; ++i)
      items.push_back({i, PolygonGeom::rectangle(i * 2.0, 0, i * 2.0 + 1, 1)});
    SpatialIndex idx(std::move(items));
    CHECK(idx.within_radius({4.5, 0.5}, 0.0) == std::vector<SpatialIndex::Id>{2});
    CHECK(idx.within_radius({3.5, 0.5}, 0.0).empty());
  }
  SUBCASE("points match linear scan") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1000);
    std::vector<SpatialIndex::Item> items;
    std::vector<Point> pts;
    for (int i = 0; i < 1000; ++i) {
      pts.push_back({u(rng), u(rng)});
      items.push_back({i, pts.back()});
    }
    std::shuffle(items.begin(), items.end(), rng);
    SpatialIndex idx(std::move(items));
    for (int q = 0; q < 100; ++q) {
      const Point p{u(rng), u(rng)};
      double best = std::numeric_limits<double>::infinity();
      SpatialIndex::Id best_id = -1;
      std::vector<SpatialIndex::Id> inside;
      const double r = 40.0;
      for (int i = 0; i < 1000; ++i) {
        const double d = distance(p, pts[i]);
        if (d < best) best = d, best_id = i;
        if (d <= r) inside.push_back(i);
      }
      const auto hit = idx.nearest(p);
      CHECK(hit.id == best_id);
      CHECK(hit.distance == best);
      CHECK(idx.within_radius(p, r) == inside);
    }
  }
  SUBCASE("polygons match linear scan") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-150, 150);
    std::vector<PolygonGeom> polys;
    std::vector<SpatialIndex::Item> items;
    for (int i = 0; i < 120; ++i) {
      polys.push_back(random_convex(rng));
      items.push_back({i, polys.back()});
    }
    SpatialIndex idx(std::move(items), 4);
    for (int q = 0; q < 100; ++q) {
      const Point p{u(rng), u(rng)};
      double best = std::numeric_limits<double>::infinity();
      SpatialIndex::Id best_id = -1;
      std::vector<SpatialIndex::Id> near;
      for (int i = 0; i < 120; ++i) {
        const double d = point_to_polygon_distance(p, polys[i]);
        if (d < best) best = d, best_id = i;
        if (d <= 10.0) near.push_back(i);
      }
      CHECK(idx.nearest(p).id == best_id);
      CHECK(idx.within_radius(p, 10.0) == near);
    }
  }
}

TEST_CASE("geometry io") {
  const auto g = annulus();
  const auto back = polygon_from_geojson(to_geojson(g));
  CHECK(back.area() == doctest::Approx(g.area()));
  CHECK(point_from_geojson(to_geojson(Point{1.5, -2})) == Point{1.5, -2});
  const auto w = polygon_from_wkt("POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0), (3 3, 3 7, 7 7, 7 3, 3 3))");
  CHECK(w.area() == doctest::Approx(84.0));
  const auto m = polygon_from_wkt("MULTIPOLYGON (((0 0,1 0,1 1,0 0)),((5 5,6 5,6 6,5 5)))");
  CHECK(m.parts().size() == 2);
  CHECK_THROWS_AS(polygon_from_wkt("LINESTRING (0 0, 1 1)"), acq::GeometryError);
  CHECK_THROWS_AS(polygon_from_geojson(nlohmann::json{{"type", "Point"}, {"coordinates", {0, 0}}}),
                  acq::GeometryError);
}
