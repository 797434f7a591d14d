#pragma once

// District assignment and choropleth GeoJSON output.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streetonomics/core.hpp"
#include "streetonomics/metrics.hpp"

namespace streetonomics {

/// Read-only lookup over a city's districts. Safe to share across threads.
class DistrictIndex {
public:
  explicit DistrictIndex(std::span<const District> districts);

  /// District id whose id or name matches the given label after fold_key().
  std::optional<std::string> by_name(std::string_view label) const;

  /// Districts whose polygon contains the point; boundary hits included.
  std::vector<std::size_t> containing(geo::Point p, bool* on_boundary = nullptr) const;

  std::span<const District> districts() const noexcept { return districts_; }

private:
  struct Box {
    double min_x, min_y, max_x, max_y;
  };
  std::span<const District> districts_;
  std::vector<Box> boxes_;
  std::vector<std::pair<std::string, std::size_t>> keys_;  // folded id/name -> index
};

struct Assignment {
  std::optional<std::string> district_id;  // nullopt = unassigned
  enum class Method { name, point, overlap, boundary, none } method = Method::none;
};

/// Name match first; otherwise the representative point of the geometry. A
/// linestring that runs through several districts (or whose point sits on a
/// boundary) goes to the district holding the longest stretch of it, ties and
/// boundary points going to the first district in config order.
Assignment assign_district(const StreetRecord& record, const DistrictIndex& index);
Assignment assign_district(std::span<const geo::Point> geometry, const DistrictIndex& index);

struct AssignmentSummary {
  std::size_t by_name = 0, by_point = 0, by_overlap = 0, by_boundary = 0, unassigned = 0;
};

/// Rewrites district_id on every record to the canonical id (or clears it).
AssignmentSummary assign_districts(std::vector<StreetRecord>& records, const DistrictIndex& index);

struct ChoroplethFeature {
  std::string district_id;
  std::string name;
  double value = 0.0;
  int bin = 0;
  const geo::MultiPolygon* polygon = nullptr;
};

struct Choropleth {
  std::string metric_id;
  std::string city_id;
  int bins = 0;
  std::vector<double> upper_edges;  // bin i covers (upper_edges[i-1], upper_edges[i]], bin 0 starts at 0
  std::vector<ChoroplethFeature> features;
  std::vector<std::string> warnings;
};

/// Equal-interval bins over [0, max value]. Throws UsageError for bins < 2.
Choropleth emit_choropleth(const DistrictMetric& metric, std::span<const District> districts, int bins);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_value(double v);

/// GeoJSON FeatureCollection with properties district_id, name, metric_id,
/// value (decimal string) and bin (integer). `metadata` is attached as a
/// foreign member when non-empty.
std::string to_geojson(const Choropleth& map, std::string_view metadata_json = {});

struct ChoroplethEntry {
  std::string district_id;
  double value = 0.0;
  int bin = 0;
};
std::vector<ChoroplethEntry> parse_choropleth(std::string_view geojson);

}  // namespace streetonomics
