#pragma once

// Planar geometry on WGS84 coordinates (degrees). No projection is applied.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace streetonomics::geo {

inline constexpr double kBoundaryEpsilon = 1e-9;

struct Point {
  double x = 0.0;  // longitude
  double y = 0.0;  // latitude
  bool operator==(const Point&) const = default;
};

/// Closed ring: front() == back().
using Ring = std::vector<Point>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
  bool operator==(const Polygon&) const = default;
};

using MultiPolygon = std::vector<Polygon>;

enum class Location { outside, boundary, inside };

/// Winding-number test with an epsilon band around the edges.
Location locate(Point p, std::span<const Point> ring);
Location locate(Point p, const Polygon& polygon);
Location locate(Point p, const MultiPolygon& shape);

bool is_closed(std::span<const Point> ring);

/// Index of the first edge taking part in a proper or touching crossing with a
/// non-adjacent edge, or nullopt if the ring is simple.
std::optional<std::size_t> find_self_intersection(std::span<const Point> ring);

double distance_to_segment(Point p, Point a, Point b);

double length(std::span<const Point> line);

/// Length of the part of the linestring lying inside (or on) the shape.
double overlap_length(std::span<const Point> line, const MultiPolygon& shape);

/// Midpoint of the middle segment; the point itself for single-point input.
Point representative_point(std::span<const Point> line);

/// Parses `LINESTRING (x y, x y, ...)` or `POINT (x y)`.
std::optional<std::vector<Point>> parse_wkt(std::string_view wkt);

}  // namespace streetonomics::geo
