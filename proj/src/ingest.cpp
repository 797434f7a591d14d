#include "streetonomics/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "streetonomics/csv.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/text.hpp"

namespace streetonomics {

namespace {

using nlohmann::json;

std::optional<std::string> optional_text(std::string_view s) {
  const auto t = text::trim(s);
  if (t.empty()) return std::nullopt;
  return std::string(t);
}

enum class YearParse { absent, ok, bad };

YearParse parse_year(std::string_view s, Year& out) {
  s = text::trim(s);
  if (s.empty()) return YearParse::absent;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) return YearParse::bad;
  return YearParse::ok;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string year_text(const std::optional<Year>& y) { return y ? std::to_string(*y) : ""; }

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

const std::set<std::string, std::less<>>& known_highway_classes() {
  static const std::set<std::string, std::less<>> classes = {
      "motorway",      "trunk",          "primary",        "secondary",     "tertiary",
      "unclassified",  "residential",    "motorway_link",  "trunk_link",    "primary_link",
      "secondary_link", "tertiary_link", "living_street",  "service",       "pedestrian",
      "track",         "bus_guideway",   "escape",         "raceway",       "road",
      "busway",        "footway",        "bridleway",      "steps",         "corridor",
      "path",          "cycleway",       "sidewalk",       "crossing",      "construction",
      "proposed",      "elevator",       "platform",       "rest_area",     "services",
  };
  return classes;
}

geo::Ring parse_ring(const json& coords, std::size_t feature) {
  if (!coords.is_array()) throw DataError("feature " + std::to_string(feature) + ": ring is not an array");
  geo::Ring ring;
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw DataError("feature " + std::to_string(feature) + ": bad coordinate");
    }
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (!geo::is_closed(ring)) {
    throw DataError("feature " + std::to_string(feature) + ": ring is not closed");
  }
  if (auto edge = geo::find_self_intersection(ring)) {
    throw DataError("feature " + std::to_string(feature) + ": self-intersecting ring at edge " +
                    std::to_string(*edge));
  }
  return ring;
}

geo::Polygon parse_polygon(const json& rings, std::size_t feature) {
  if (!rings.is_array() || rings.empty()) {
    throw DataError("feature " + std::to_string(feature) + ": polygon without rings");
  }
  geo::Polygon poly;
  poly.outer = parse_ring(rings[0], feature);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(parse_ring(rings[i], feature));
  return poly;
}

}  // namespace

std::size_t IngestReport::rows_dropped() const {
  return std::accumulate(rows_dropped_by_reason.begin(), rows_dropped_by_reason.end(),
                         std::size_t{0}, [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

CuratedDataset parse_curated_dataset(std::istream& in, const CityConfig& city) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw DataError("dataset is empty: missing header row");
  const csv::Header header(std::move(*header_row));
  if (auto missing = header.first_missing(kCanonicalColumns)) {
    throw DataError("dataset schema mismatch: missing column '" + *missing + "'");
  }
  std::array<std::size_t, kCanonicalColumns.size()> col{};
  for (std::size_t i = 0; i < kCanonicalColumns.size(); ++i) col[i] = *header.find(kCanonicalColumns[i]);
  const auto geometry_col = header.find(kGeometryColumn);
  enum Col { kCity, kStreet, kDistrict, kDenom, kHonoree, kGender, kOccRaw, kOccGroup, kCountry, kBirth, kDeath };

  const std::string city_key = text::fold_key(city.city_id);
  const std::string city_name_key = text::fold_key(city.display_name);

  CuratedDataset out;
  IngestReport& report = out.report;
  std::set<std::pair<std::string, std::string>> seen;

  while (auto row = reader.next()) {
    if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;  // blank line
    ++report.rows_read;
    if (reader.last_was_malformed() || row->size() != header.names().size()) {
      report.drop("malformed_row");
      continue;
    }
    const auto field = [&](Col c) -> std::string_view { return (*row)[col[c]]; };

    if (const auto c = text::fold_key(field(kCity)); !c.empty() && c != city_key && c != city_name_key) {
      report.drop("wrong_city");
      continue;
    }
    StreetRecord rec;
    rec.city_id = city.city_id;
    rec.street_name = std::string(text::trim(field(kStreet)));
    if (rec.street_name.empty()) {
      report.drop("no_street_name");
      continue;
    }
    const auto honoree_name = optional_text(field(kHonoree));
    if (!honoree_name) {
      report.drop("no_honoree");
      continue;
    }
    Year denom = 0, birth = 0, death = 0;
    const auto denom_state = parse_year(field(kDenom), denom);
    const auto birth_state = parse_year(field(kBirth), birth);
    const auto death_state = parse_year(field(kDeath), death);
    if (denom_state == YearParse::bad || birth_state == YearParse::bad ||
        death_state == YearParse::bad ||
        (denom_state == YearParse::ok &&
         (denom < kMinDenominationYear || denom > kMaxDenominationYear))) {
      report.drop("bad_year");
      continue;
    }
    const auto gender = parse_gender(field(kGender));
    if (!gender) {
      report.drop("bad_field");
      continue;
    }
    if (birth_state == YearParse::ok && death_state == YearParse::ok && birth > death) {
      report.drop("bad_lifespan");
      continue;
    }
    std::optional<StreetGeometry> geometry;
    if (geometry_col && !text::trim((*row)[*geometry_col]).empty()) {
      geometry = geo::parse_wkt((*row)[*geometry_col]);
      if (!geometry) {
        report.drop("bad_geometry");
        continue;
      }
    }

    rec.district_id = optional_text(field(kDistrict));
    if (denom_state == YearParse::ok) rec.denomination_year = denom;
    rec.geometry = std::move(geometry);

    Honoree h;
    h.full_name = *honoree_name;
    h.gender = *gender;
    h.occupation_raw = optional_text(field(kOccRaw));
    if (auto g = optional_text(field(kOccGroup))) {
      h.occupation_group = parse_occupation_group(*g);
      if (!h.occupation_group) ++report.warnings["unknown_occupation_group"];
    }
    if (auto c = optional_text(field(kCountry))) {
      h.country_of_origin = normalize_country(*c);
      if (!h.country_of_origin) ++report.warnings["unknown_country"];
    }
    if (birth_state == YearParse::ok) h.birth_year = birth;
    if (death_state == YearParse::ok) h.death_year = death;
    rec.honoree = std::move(h);

    auto key = std::make_pair(text::fold_key(rec.street_name),
                              text::fold_key(rec.district_id.value_or("")));
    if (!seen.insert(std::move(key)).second) {
      report.drop("duplicate");
      continue;
    }
    out.records.push_back(std::move(rec));
    ++report.rows_kept;
  }
  return out;
}

CuratedDataset parse_curated_dataset(const std::filesystem::path& path, const CityConfig& city) {
  auto in = open_or_throw(path);
  try {
    return parse_curated_dataset(in, city);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_curated_dataset(std::ostream& out, std::span<const StreetRecord> records) {
  const bool with_geometry =
      std::any_of(records.begin(), records.end(), [](const auto& r) { return r.geometry.has_value(); });
  std::vector<std::string> header(kCanonicalColumns.begin(), kCanonicalColumns.end());
  if (with_geometry) header.emplace_back(kGeometryColumn);
  csv::write_row(out, header);
  for (const auto& r : records) {
    const Honoree empty;
    const Honoree& h = r.honoree ? *r.honoree : empty;
    std::vector<std::string> row = {
        r.city_id,
        r.street_name,
        r.district_id.value_or(""),
        year_text(r.denomination_year),
        h.full_name,
        r.honoree && h.gender != Gender::unknown ? std::string(to_string(h.gender)) : "",
        h.occupation_raw.value_or(""),
        h.occupation_group ? std::string(to_string(*h.occupation_group)) : "",
        h.country_of_origin ? h.country_of_origin->code : "",
        year_text(h.birth_year),
        year_text(h.death_year),
    };
    if (with_geometry) row.push_back(r.geometry ? format_wkt(*r.geometry) : "");
    csv::write_row(out, row);
  }
}

std::vector<District> parse_districts(std::string_view geojson) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("district file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw DataError("district file is not a GeoJSON FeatureCollection");
  }
  std::vector<District> districts;
  std::set<std::string> ids;
  const auto& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const auto where = "feature " + std::to_string(i);
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
      throw DataError(where + ": missing geometry");
    }
    const auto& g = f["geometry"];
    const std::string type = g.value("type", "");
    if (type != "Polygon" && type != "MultiPolygon") {
      throw DataError(where + ": geometry type '" + type + "' is not a polygon");
    }
    const json props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : json::object();
    if (!props.contains("name") || !props["name"].is_string()) {
      throw DataError(where + ": missing string property 'name'");
    }
    District d;
    d.name = props["name"].get<std::string>();
    d.district_id = d.name;
    for (const char* key : {"district_id", "id"}) {
      if (props.contains(key)) {
        const auto& v = props[key];
        d.district_id = v.is_string() ? v.get<std::string>() : v.dump();
        break;
      }
    }
    if (!g.contains("coordinates")) throw DataError(where + ": missing coordinates");
    if (type == "Polygon") {
      d.polygon.push_back(parse_polygon(g["coordinates"], i));
    } else {
      if (!g["coordinates"].is_array() || g["coordinates"].empty()) {
        throw DataError(where + ": empty multipolygon");
      }
      for (const auto& p : g["coordinates"]) d.polygon.push_back(parse_polygon(p, i));
    }
    if (!ids.insert(d.district_id).second) {
      throw DataError(where + ": duplicate district id '" + d.district_id + "'");
    }
    districts.push_back(std::move(d));
  }
  return districts;
}

std::vector<District> parse_districts(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_districts(std::string_view(ss.str()));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

bool is_known_highway_class(std::string_view highway_class) {
  return known_highway_classes().contains(highway_class);
}

RoadExtract parse_osm_roads(std::istream& in, std::span<const std::string> exclusions) {
  RoadExtract out;
  IngestReport& report = out.report;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.starts_with('#')) continue;
    ++report.rows_read;

    std::vector<std::string_view> parts;
    std::string_view rest = line;
    for (std::size_t tab; (tab = rest.find('\t')) != std::string_view::npos;) {
      parts.push_back(rest.substr(0, tab));
      rest.remove_prefix(tab + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 3) {
      report.drop("malformed");
      continue;
    }
    auto geometry = geo::parse_wkt(parts[2]);
    if (!geometry) {
      report.drop("malformed");
      continue;
    }
    RoadSegment seg;
    seg.highway_class = text::to_lower_ascii(text::trim(parts[0]));
    seg.name = optional_text(parts[1]);
    seg.geometry = std::move(*geometry);
    if (std::find(exclusions.begin(), exclusions.end(), seg.highway_class) != exclusions.end()) {
      report.drop("excluded_class");
      continue;
    }
    if (!seg.name || text::contains_decimal_digit(*seg.name)) {
      report.drop("numbered_or_unnamed");
      continue;
    }
    if (!seen.insert(text::fold_key(*seg.name)).second) {
      report.drop("duplicate");
      continue;
    }
    if (!is_known_highway_class(seg.highway_class)) {
      seg.unknown_class = true;
      ++report.warnings["unknown_highway_class"];
    }
    out.segments.push_back(std::move(seg));
    ++report.rows_kept;
  }
  if (in.bad()) throw DataError("error while reading road extract");
  return out;
}

RoadExtract parse_osm_roads(const std::filesystem::path& path,
                            std::span<const std::string> exclusions) {
  auto in = open_or_throw(path);
  return parse_osm_roads(in, exclusions);
}

std::string format_wkt(std::span<const geo::Point> geometry) {
  std::string out = geometry.size() == 1 ? "POINT (" : "LINESTRING (";
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    if (i) out += ", ";
    out += format_double(geometry[i].x) + " " + format_double(geometry[i].y);
  }
  out += ")";
  return out;
}

void write_osm_roads(std::ostream& out, std::span<const RoadSegment> segments) {
  for (const auto& s : segments) {
    out << s.highway_class << '\t' << s.name.value_or("") << '\t' << format_wkt(s.geometry) << '\n';
  }
}

}  // namespace streetonomics
