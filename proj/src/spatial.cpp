#include "streetonomics/spatial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "streetonomics/error.hpp"
#include "streetonomics/text.hpp"

namespace streetonomics {

namespace {

using nlohmann::ordered_json;

ordered_json ring_json(const geo::Ring& ring) {
  ordered_json out = ordered_json::array();
  for (const auto& p : ring) out.push_back({p.x, p.y});
  return out;
}

}  // namespace

DistrictIndex::DistrictIndex(std::span<const District> districts) : districts_(districts) {
  for (std::size_t i = 0; i < districts.size(); ++i) {
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& poly : districts[i].polygon) {
      for (const auto& p : poly.outer) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
      }
    }
    boxes_.push_back(b);
    keys_.emplace_back(text::fold_key(districts[i].district_id), i);
    keys_.emplace_back(text::fold_key(districts[i].name), i);
  }
}

std::optional<std::string> DistrictIndex::by_name(std::string_view label) const {
  const auto key = text::fold_key(label);
  if (key.empty()) return std::nullopt;
  for (const auto& [k, i] : keys_) {
    if (k == key) return districts_[i].district_id;
  }
  return std::nullopt;
}

std::vector<std::size_t> DistrictIndex::containing(geo::Point p, bool* on_boundary) const {
  std::vector<std::size_t> hits;
  bool boundary = false;
  constexpr double eps = geo::kBoundaryEpsilon;
  for (std::size_t i = 0; i < districts_.size(); ++i) {
    const Box& b = boxes_[i];
    if (p.x < b.min_x - eps || p.x > b.max_x + eps || p.y < b.min_y - eps || p.y > b.max_y + eps) continue;
    const auto loc = geo::locate(p, districts_[i].polygon);
    if (loc == geo::Location::outside) continue;
    if (loc == geo::Location::boundary) boundary = true;
    hits.push_back(i);
  }
  if (on_boundary) *on_boundary = boundary;
  return hits;
}

Assignment assign_district(std::span<const geo::Point> geometry, const DistrictIndex& index) {
  Assignment a;
  if (geometry.empty()) return a;
  bool boundary = false;
  const auto hits = index.containing(geo::representative_point(geometry), &boundary);

  if (geometry.size() >= 2) {
    // Longest overlap decides when the street spans districts or the point is ambiguous.
    std::vector<std::pair<std::size_t, double>> overlaps;
    for (std::size_t i = 0; i < index.districts().size(); ++i) {
      const double len = geo::overlap_length(geometry, index.districts()[i].polygon);
      if (len > 0.0) overlaps.emplace_back(i, len);
    }
    if (overlaps.size() > 1 || (overlaps.size() == 1 && (boundary || hits.size() != 1))) {
      auto best = overlaps.front();
      for (const auto& o : overlaps) {
        if (o.second > best.second) best = o;
      }
      a.district_id = index.districts()[best.first].district_id;
      a.method = Assignment::Method::overlap;
      return a;
    }
  }
  if (hits.empty()) return a;
  a.district_id = index.districts()[hits.front()].district_id;
  a.method = boundary || hits.size() > 1 ? Assignment::Method::boundary : Assignment::Method::point;
  return a;
}

Assignment assign_district(const StreetRecord& record, const DistrictIndex& index) {
  if (record.district_id) {
    if (auto id = index.by_name(*record.district_id)) {
      return {std::move(id), Assignment::Method::name};
    }
  }
  if (record.geometry) return assign_district(*record.geometry, index);
  return {};
}

AssignmentSummary assign_districts(std::vector<StreetRecord>& records, const DistrictIndex& index) {
  AssignmentSummary s;
  for (auto& r : records) {
    auto a = assign_district(r, index);
    switch (a.method) {
      case Assignment::Method::name: ++s.by_name; break;
      case Assignment::Method::point: ++s.by_point; break;
      case Assignment::Method::overlap: ++s.by_overlap; break;
      case Assignment::Method::boundary: ++s.by_boundary; break;
      case Assignment::Method::none: ++s.unassigned; break;
    }
    r.district_id = std::move(a.district_id);
  }
  return s;
}

Choropleth emit_choropleth(const DistrictMetric& metric, std::span<const District> districts, int bins) {
  if (bins < 2) throw UsageError("choropleth needs at least 2 bins, got " + std::to_string(bins));
  Choropleth map;
  map.metric_id = metric.metric_id;
  map.city_id = metric.city_id;

  double max_value = 0.0;
  for (const auto& d : districts) {
    ChoroplethFeature f;
    f.district_id = d.district_id;
    f.name = d.name;
    f.polygon = &d.polygon;
    if (auto it = metric.values.find(d.district_id); it != metric.values.end()) {
      f.value = it->second.value().value_or(0.0);
    }
    max_value = std::max(max_value, f.value);
    map.features.push_back(std::move(f));
  }

  if (max_value <= 0.0) {
    map.bins = 1;
    map.upper_edges = {0.0};
    map.warnings.push_back("metric '" + metric.metric_id + "' is zero in every district; single bin");
    return map;
  }
  map.bins = bins;
  for (int i = 1; i <= bins; ++i) {
    map.upper_edges.push_back(i == bins ? max_value : max_value * i / bins);
  }
  for (auto& f : map.features) {
    const auto it = std::lower_bound(map.upper_edges.begin(), map.upper_edges.end(), f.value);
    f.bin = static_cast<int>(std::min<std::ptrdiff_t>(it - map.upper_edges.begin(), bins - 1));
  }
  return map;
}

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string to_geojson(const Choropleth& map, std::string_view metadata_json) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  if (!metadata_json.empty()) doc["metadata"] = ordered_json::parse(metadata_json);
  doc["metric_id"] = map.metric_id;
  doc["city_id"] = map.city_id;
  doc["bins"] = map.bins;
  ordered_json edges = ordered_json::array();
  for (double e : map.upper_edges) edges.push_back(format_value(e));
  doc["bin_upper_edges"] = std::move(edges);
  ordered_json features = ordered_json::array();
  for (const auto& f : map.features) {
    ordered_json polys = ordered_json::array();
    for (const auto& poly : *f.polygon) {
      ordered_json rings = ordered_json::array();
      rings.push_back(ring_json(poly.outer));
      for (const auto& h : poly.holes) rings.push_back(ring_json(h));
      polys.push_back(std::move(rings));
    }
    ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"] = {{"district_id", f.district_id},
                             {"name", f.name},
                             {"metric_id", map.metric_id},
                             {"value", format_value(f.value)},
                             {"bin", f.bin}};
    feature["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", std::move(polys)}};
    features.push_back(std::move(feature));
  }
  doc["features"] = std::move(features);
  return doc.dump(1) + "\n";
}

std::vector<ChoroplethEntry> parse_choropleth(std::string_view geojson) {
  std::vector<ChoroplethEntry> out;
  try {
    const auto doc = nlohmann::json::parse(geojson);
    for (const auto& f : doc.at("features")) {
      const auto& p = f.at("properties");
      ChoroplethEntry e;
      e.district_id = p.at("district_id").get<std::string>();
      const auto text = p.at("value").get<std::string>();
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), e.value);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw DataError("choropleth value '" + text + "' is not a number");
      }
      e.bin = p.at("bin").get<int>();
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("not a choropleth GeoJSON: ") + e.what());
  }
  return out;
}

}  // namespace streetonomics
