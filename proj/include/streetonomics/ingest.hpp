#pragma once

// Readers for the canonical street dataset CSV, district GeoJSON and the
// tab-separated OSM road dump, plus writers for the canonical forms.

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streetonomics/core.hpp"

namespace streetonomics {

inline constexpr std::array<std::string_view, 11> kCanonicalColumns = {
    "city",       "street_name",      "district",  "denomination_year",
    "honoree_name", "gender",         "occupation_raw", "occupation_group",
    "country",    "birth_year",       "death_year",
};

/// Optional trailing column carrying WKT geometry.
inline constexpr std::string_view kGeometryColumn = "geometry";

inline const std::vector<std::string> kDefaultRoadExclusions = {"motorway", "trunk", "cycleway",
                                                                "path"};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::map<std::string, std::size_t> rows_dropped_by_reason;
  /// Non-fatal observations on kept rows (unknown country, unknown highway class, ...).
  std::map<std::string, std::size_t> warnings;

  std::size_t rows_dropped() const;
  bool balanced() const { return rows_read == rows_kept + rows_dropped(); }
  void drop(const std::string& reason) { ++rows_dropped_by_reason[reason]; }
};

struct CuratedDataset {
  std::vector<StreetRecord> records;
  IngestReport report;
};

/// Throws DataError naming the first missing column on a schema mismatch.
CuratedDataset parse_curated_dataset(std::istream& in, const CityConfig& city);
CuratedDataset parse_curated_dataset(const std::filesystem::path& path, const CityConfig& city);

void write_curated_dataset(std::ostream& out, std::span<const StreetRecord> records);

std::vector<District> parse_districts(std::string_view geojson);
std::vector<District> parse_districts(const std::filesystem::path& path);

struct RoadSegment {
  std::optional<std::string> name;
  std::string highway_class;
  std::vector<geo::Point> geometry;
  bool unknown_class = false;
  std::optional<std::string> district_id;  // filled by spatial assignment
};

struct RoadExtract {
  std::vector<RoadSegment> segments;
  IngestReport report;
};

bool is_known_highway_class(std::string_view highway_class);

RoadExtract parse_osm_roads(std::istream& in, std::span<const std::string> exclusions);
RoadExtract parse_osm_roads(const std::filesystem::path& path,
                            std::span<const std::string> exclusions);

void write_osm_roads(std::ostream& out, std::span<const RoadSegment> segments);

std::string format_wkt(std::span<const geo::Point> geometry);

}  // namespace streetonomics
