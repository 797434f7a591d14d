#include "streetonomics/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "streetonomics/text.hpp"

namespace streetonomics::geo {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point p, Point a, Point b) {
  return distance_to_segment(p, a, b) <= kBoundaryEpsilon;
}

int orientation(Point a, Point b, Point c) {
  const double v = cross(a, b, c);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool within_box(Point p, Point a, Point b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(Point a, Point b, Point c, Point d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(c, a, b)) return true;
  if (o2 == 0 && within_box(d, a, b)) return true;
  if (o3 == 0 && within_box(a, c, d)) return true;
  if (o4 == 0 && within_box(b, c, d)) return true;
  return false;
}

// Parameter t along p->q where it crosses segment a->b, if the two properly cross.
std::optional<double> crossing_parameter(Point p, Point q, Point a, Point b) {
  const double rx = q.x - p.x, ry = q.y - p.y;
  const double sx = b.x - a.x, sy = b.y - a.y;
  const double denom = rx * sy - ry * sx;
  if (denom == 0.0) return std::nullopt;
  const double t = ((a.x - p.x) * sy - (a.y - p.y) * sx) / denom;
  const double u = ((a.x - p.x) * ry - (a.y - p.y) * rx) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

void collect_cuts(Point p, Point q, std::span<const Point> ring, std::vector<double>& cuts) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    if (auto t = crossing_parameter(p, q, ring[i], ring[i + 1])) cuts.push_back(*t);
  }
}

}  // namespace

double distance_to_segment(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

bool is_closed(std::span<const Point> ring) {
  return ring.size() >= 4 && ring.front() == ring.back();
}

Location locate(Point p, std::span<const Point> ring) {
  if (ring.size() < 2) return Location::outside;
  int winding = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point a = ring[i], b = ring[i + 1];
    if (on_segment(p, a, b)) return Location::boundary;
    if (a.y <= p.y) {
      if (b.y > p.y && cross(a, b, p) > 0) ++winding;
    } else {
      if (b.y <= p.y && cross(a, b, p) < 0) --winding;
    }
  }
  return winding != 0 ? Location::inside : Location::outside;
}

Location locate(Point p, const Polygon& polygon) {
  const Location outer = locate(p, std::span<const Point>(polygon.outer));
  if (outer != Location::inside) return outer;
  for (const Ring& hole : polygon.holes) {
    const Location h = locate(p, std::span<const Point>(hole));
    if (h == Location::boundary) return Location::boundary;
    if (h == Location::inside) return Location::outside;
  }
  return Location::inside;
}

Location locate(Point p, const MultiPolygon& shape) {
  Location best = Location::outside;
  for (const Polygon& poly : shape) {
    const Location l = locate(p, poly);
    if (l == Location::inside) return l;
    if (l == Location::boundary) best = l;
  }
  return best;
}

std::optional<std::size_t> find_self_intersection(std::span<const Point> ring) {
  const std::size_t edges = ring.size() < 2 ? 0 : ring.size() - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    if (ring[i] == ring[i + 1]) return i;  // zero-length edge
    for (std::size_t j = i + 1; j < edges; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == edges - 1);
      if (adjacent) {
        // Adjacent edges share one vertex; they may only overlap if collinear and folding back.
        const Point shared = j == i + 1 ? ring[i + 1] : ring[i];
        const Point u = j == i + 1 ? ring[i] : ring[i + 1];
        const Point v = j == i + 1 ? ring[j + 1] : ring[j];
        if (orientation(shared, u, v) == 0 &&
            (u.x - shared.x) * (v.x - shared.x) + (u.y - shared.y) * (v.y - shared.y) > 0) {
          return i;
        }
        continue;
      }
      if (segments_touch(ring[i], ring[i + 1], ring[j], ring[j + 1])) return i;
    }
  }
  return std::nullopt;
}

double length(std::span<const Point> line) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    total += std::hypot(line[i + 1].x - line[i].x, line[i + 1].y - line[i].y);
  }
  return total;
}

double overlap_length(std::span<const Point> line, const MultiPolygon& shape) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Point p = line[i], q = line[i + 1];
    const double seg = std::hypot(q.x - p.x, q.y - p.y);
    if (seg == 0.0) continue;
    std::vector<double> cuts = {0.0, 1.0};
    for (const Polygon& poly : shape) {
      collect_cuts(p, q, poly.outer, cuts);
      for (const Ring& hole : poly.holes) collect_cuts(p, q, hole, cuts);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double t0 = cuts[k], t1 = cuts[k + 1];
      if (t1 <= t0) continue;
      const double tm = 0.5 * (t0 + t1);
      const Point mid{p.x + tm * (q.x - p.x), p.y + tm * (q.y - p.y)};
      if (locate(mid, shape) != Location::outside) total += (t1 - t0) * seg;
    }
  }
  return total;
}

Point representative_point(std::span<const Point> line) {
  if (line.empty()) return {};
  if (line.size() == 1) return line.front();
  const std::size_t segment = (line.size() - 2) / 2;
  const Point a = line[segment], b = line[segment + 1];
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

std::optional<std::vector<Point>> parse_wkt(std::string_view wkt) {
  wkt = text::trim(wkt);
  const auto open = wkt.find('(');
  const auto close = wkt.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  const auto tag = text::to_lower_ascii(text::trim(wkt.substr(0, open)));
  const bool is_point = tag == "point";
  if (!is_point && tag != "linestring") return std::nullopt;
  if (!text::trim(wkt.substr(close + 1)).empty()) return std::nullopt;

  std::vector<Point> points;
  std::string_view body = wkt.substr(open + 1, close - open - 1);
  while (true) {
    const auto comma = body.find(',');
    const std::string_view item = text::trim(body.substr(0, comma));
    double coords[2];
    std::size_t pos = 0;
    for (double& c : coords) {
      while (pos < item.size() && (item[pos] == ' ' || item[pos] == '\t')) ++pos;
      const char* begin = item.data() + pos;
      const char* end = item.data() + item.size();
      auto [ptr, ec] = std::from_chars(begin, end, c);
      if (ec != std::errc() || ptr == begin) return std::nullopt;
      pos = static_cast<std::size_t>(ptr - item.data());
    }
    if (!text::trim(item.substr(pos)).empty()) return std::nullopt;
    if (!std::isfinite(coords[0]) || !std::isfinite(coords[1])) return std::nullopt;
    points.push_back({coords[0], coords[1]});
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  if (is_point ? points.size() != 1 : points.size() < 2) return std::nullopt;
  return points;
}

}  // namespace streetonomics::geo
