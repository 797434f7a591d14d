#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/geometry.hpp"
#include "streetonomics/spatial.hpp"

using namespace streetonomics;
using geo::Point;

namespace {

geo::Ring square(double x0, double y0, double size) {
  return {{x0, y0}, {x0 + size, y0}, {x0 + size, y0 + size}, {x0, y0 + size}, {x0, y0}};
}

District district(std::string id, geo::Ring ring) {
  return District{id, "District " + id, geo::MultiPolygon{geo::Polygon{std::move(ring), {}}}};
}

std::vector<District> two_squares() { return {district("A", square(0, 0, 1)), district("B", square(1, 0, 1))}; }

StreetRecord street(std::vector<Point> line, std::optional<std::string> district_name = std::nullopt) {
  StreetRecord r;
  r.city_id = "t";
  r.street_name = "s";
  r.geometry = std::move(line);
  r.district_id = std::move(district_name);
  return r;
}

}  // namespace

TEST(Geometry, WindingNumberMatchesRayCastingOracle) {
  std::mt19937_64 rng(20200);
  std::size_t checked = 0, inside = 0;
  while (checked < 10000) {
    const auto ring = oracle::random_convex_ring(rng);
    std::uniform_real_distribution<double> coord(-75.0, 75.0);
    for (int i = 0; i < 50 && checked < 10000; ++i) {
      const Point p{coord(rng), coord(rng)};
      if (oracle::distance_to_ring(ring, p) < 1e-6) continue;  // edge points: boundary band vs. even-odd rule
      const bool expected = oracle::ray_cast_inside(ring, p);
      ASSERT_EQ(geo::locate(p, ring) == geo::Location::inside, expected) << p.x << "," << p.y;
      inside += expected;
      ++checked;
    }
    // Points placed inside by construction: centroid of the vertices.
    Point c{0, 0};
    for (std::size_t k = 0; k + 1 < ring.size(); ++k) c = {c.x + ring[k].x, c.y + ring[k].y};
    c = {c.x / (ring.size() - 1), c.y / (ring.size() - 1)};
    if (oracle::distance_to_ring(ring, c) > 1e-6) { EXPECT_EQ(geo::locate(c, ring), geo::Location::inside); }
  }
  EXPECT_GT(inside, 100u);
}

TEST(Geometry, BoundaryBand) {
  const auto ring = square(0, 0, 1);
  EXPECT_EQ(geo::locate({0.5, 0.0}, ring), geo::Location::boundary);
  EXPECT_EQ(geo::locate({1.0, 1.0}, ring), geo::Location::boundary);
  EXPECT_EQ(geo::locate({0.5, 1e-10}, ring), geo::Location::boundary);
  EXPECT_EQ(geo::locate({0.5, 1e-6}, ring), geo::Location::inside);
  EXPECT_EQ(geo::locate({0.5, -1e-6}, ring), geo::Location::outside);
}

TEST(Geometry, HolesAreOutside) {
  geo::Polygon donut{square(0, 0, 10), {square(4, 4, 2)}};
  EXPECT_EQ(geo::locate({5, 5}, donut), geo::Location::outside);
  EXPECT_EQ(geo::locate({1, 1}, donut), geo::Location::inside);
  EXPECT_EQ(geo::locate({4, 5}, donut), geo::Location::boundary);
}

TEST(Geometry, SelfIntersectionDetected) {
  const geo::Ring bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}};
  EXPECT_TRUE(geo::find_self_intersection(bowtie).has_value());
  EXPECT_FALSE(geo::find_self_intersection(square(0, 0, 1)).has_value());
}

TEST(Geometry, OverlapLengthAnalytic) {
  const geo::MultiPolygon a{geo::Polygon{square(0, 0, 1), {}}};
  const std::vector<Point> line = {{0.3, 0.5}, {1.3, 0.5}};
  EXPECT_NEAR(geo::overlap_length(line, a), 0.7, 1e-12);
  EXPECT_NEAR(geo::length(line), 1.0, 1e-12);
}

TEST(Geometry, RepresentativePointIsMiddleSegmentMidpoint) {
  const std::vector<Point> line = {{0, 0}, {2, 0}, {2, 2}, {4, 2}};
  EXPECT_EQ(geo::representative_point(line), (Point{2, 1}));
  const std::vector<Point> single = {{3, 4}};
  EXPECT_EQ(geo::representative_point(single), (Point{3, 4}));
}

TEST(Geometry, Wkt) {
  const auto l = geo::parse_wkt("LINESTRING (1 2, 3.5 -4)");
  ASSERT_TRUE(l);
  EXPECT_EQ(*l, (std::vector<Point>{{1, 2}, {3.5, -4}}));
  EXPECT_EQ(geo::parse_wkt("POINT(1 2)")->size(), 1u);
  EXPECT_FALSE(geo::parse_wkt("POLYGON((0 0, 1 0, 0 0))").has_value());
  EXPECT_FALSE(geo::parse_wkt("LINESTRING(1 a)").has_value());
}

TEST(AssignDistrict, PointInsideOutside) {
  const auto ds = two_squares();
  const DistrictIndex index(ds);
  EXPECT_EQ(assign_district(street({{0.2, 0.5}, {0.4, 0.5}}), index).district_id, "A");
  const auto out = assign_district(street({{5, 5}, {6, 5}}), index);
  EXPECT_FALSE(out.district_id.has_value());
  EXPECT_EQ(out.method, Assignment::Method::none);
}

TEST(AssignDistrict, NameMatchWins) {
  const auto ds = two_squares();
  const DistrictIndex index(ds);
  const auto a = assign_district(street({{0.2, 0.5}, {0.4, 0.5}}, "district b"), index);
  EXPECT_EQ(a.district_id, "B");
  EXPECT_EQ(a.method, Assignment::Method::name);
}

TEST(AssignDistrict, SeventyThirtyGoesToLargerOverlap) {
  const auto ds = two_squares();
  const DistrictIndex index(ds);
  // 0.3 of the street in A, 0.7 in B; the representative point sits in A.
  const auto a = assign_district(street({{0.7, 0.5}, {0.8, 0.5}, {1.7, 0.5}}), index);
  EXPECT_EQ(a.district_id, "B");
  EXPECT_EQ(a.method, Assignment::Method::overlap);
  const auto b = assign_district(street({{0.3, 0.5}, {1.3, 0.5}}), index);
  EXPECT_EQ(b.district_id, "A");
}

TEST(AssignDistrict, BoundaryPointGoesToFirstDistrict) {
  const auto ds = two_squares();
  const DistrictIndex index(ds);
  const std::vector<Point> p = {{1.0, 0.5}};
  EXPECT_EQ(assign_district(p, index).district_id, "A");
}

TEST(AssignDistrict, DeterministicAndTotal) {
  const auto ds = two_squares();
  const DistrictIndex index(ds);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(-0.5, 2.5);
  for (int i = 0; i < 2000; ++i) {
    std::vector<Point> line = {{c(rng), c(rng)}, {c(rng), c(rng)}, {c(rng), c(rng)}};
    const auto a = assign_district(line, index);
    const auto b = assign_district(line, index);
    EXPECT_EQ(a.district_id, b.district_id);
    EXPECT_EQ(a.method, b.method);
    if (a.district_id) { EXPECT_TRUE(*a.district_id == "A" || *a.district_id == "B"); }
    else { EXPECT_EQ(a.method, Assignment::Method::none); }
  }
}

TEST(AssignDistricts, SummaryCounts) {
  const auto ds = two_squares();
  const DistrictIndex index(ds);
  std::vector<StreetRecord> rs = {street({{0.5, 0.5}}, "A"), street({{0.5, 0.5}}), street({{9, 9}})};
  const auto s = assign_districts(rs, index);
  EXPECT_EQ(s.by_name, 1u);
  EXPECT_EQ(s.by_point, 1u);
  EXPECT_EQ(s.unassigned, 1u);
  EXPECT_FALSE(rs[2].district_id.has_value());
}

TEST(Choropleth, TwoBinsOverThreeValues) {
  std::vector<District> ds = {district("d1", square(0, 0, 1)), district("d2", square(1, 0, 1)),
                              district("d3", square(2, 0, 1))};
  DistrictMetric m{"f_prop_by_district", "t", {{"d1", {0, 2}}, {"d2", {1, 2}}, {"d3", {2, 2}}}};
  const auto map = emit_choropleth(m, ds, 2);
  ASSERT_EQ(map.features.size(), 3u);
  EXPECT_EQ(map.features[0].bin, 0);
  EXPECT_EQ(map.features[1].bin, 0);
  EXPECT_EQ(map.features[2].bin, 1);
  EXPECT_EQ(map.upper_edges, (std::vector<double>{0.5, 1.0}));
}

TEST(Choropleth, UniformValuesShareABinAndAllZeroWarns) {
  std::vector<District> ds = {district("a", square(0, 0, 1)), district("b", square(1, 0, 1))};
  DistrictMetric same{"m", "t", {{"a", {1, 4}}, {"b", {1, 4}}}};
  const auto map = emit_choropleth(same, ds, 5);
  EXPECT_EQ(map.features[0].bin, map.features[1].bin);
  DistrictMetric zero{"m", "t", {{"a", {0, 4}}, {"b", {0, 4}}}};
  const auto z = emit_choropleth(zero, ds, 5);
  EXPECT_EQ(z.bins, 1);
  EXPECT_FALSE(z.warnings.empty());
  EXPECT_THROW(emit_choropleth(same, ds, 1), UsageError);
}

TEST(Choropleth, EveryConfiguredDistrictOnce) {
  std::vector<District> ds = {district("a", square(0, 0, 1)), district("b", square(1, 0, 1))};
  DistrictMetric m{"m", "t", {{"a", {1, 3}}}};  // b has no streets
  const auto map = emit_choropleth(m, ds, 3);
  ASSERT_EQ(map.features.size(), 2u);
  EXPECT_EQ(map.features[1].district_id, "b");
  EXPECT_EQ(map.features[1].value, 0.0);
}

TEST(Choropleth, GeoJsonRoundTripIsExact) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<District> ds;
    DistrictMetric m{"f_prop_by_district", "t", {}};
    for (int i = 0; i < 8; ++i) {
      const std::string id = "d" + std::to_string(i);
      ds.push_back(district(id, square(i, 0, 1)));
      m.values[id] = Proportion{static_cast<std::int64_t>(rng() % 97), 97 + static_cast<std::int64_t>(rng() % 1000)};
    }
    const auto map = emit_choropleth(m, ds, 4);
    const auto back = parse_choropleth(to_geojson(map, R"({"k":"v"})"));
    ASSERT_EQ(back.size(), map.features.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back[i].district_id, map.features[i].district_id);
      EXPECT_EQ(back[i].value, *m.values.at(back[i].district_id).value());  // bit-exact
      EXPECT_EQ(back[i].bin, map.features[i].bin);
    }
  }
}

TEST(FormatValue, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 0.0, 1.0, 2.5e-9}) {
    EXPECT_EQ(std::stod(format_value(v)), v);
  }
  EXPECT_EQ(format_value(0.5), "0.5");
}
