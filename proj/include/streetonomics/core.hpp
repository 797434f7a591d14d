#pragma once

// Shared domain model: streets, honorees, cities, decades and occupation groups.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streetonomics/geometry.hpp"

namespace streetonomics {

using Year = int;  // negative years are BC

inline constexpr Year kMinDenominationYear = 1000;
inline constexpr Year kMaxDenominationYear = 2100;

/// Start year of a ten-year bucket. Always a multiple of 10.
class Decade {
public:
  constexpr Decade() = default;
  constexpr int start_year() const noexcept { return start_; }
  constexpr auto operator<=>(const Decade&) const = default;

  /// Wraps a value that is already a decade boundary; throws on anything else.
  static Decade from_start(int start_year);

private:
  friend constexpr Decade decade_of(Year year) noexcept;
  constexpr explicit Decade(int start) : start_(start) {}
  int start_ = 0;
};

/// floor(year / 10) * 10, flooring towards negative infinity for BC years.
constexpr Decade decade_of(Year year) noexcept {
  int q = year / 10;
  if (year % 10 != 0 && year < 0) --q;
  return Decade(q * 10);
}

enum class Gender { female, male, unknown };

enum class OccupationGroup {
  creative_performing_artists,
  authors_journalists_linguists,
  science_engineering,
  legal_social_cultural,
  craft_trades,
  business_administration,
  legislators,
  armed_forces_officers,
  religious,
  health_associate,
  teaching,
  other,
};

inline constexpr std::size_t kOccupationGroupCount = 12;

inline constexpr std::array<OccupationGroup, kOccupationGroupCount> kAllOccupationGroups = {
    OccupationGroup::creative_performing_artists, OccupationGroup::authors_journalists_linguists,
    OccupationGroup::science_engineering,         OccupationGroup::legal_social_cultural,
    OccupationGroup::craft_trades,                OccupationGroup::business_administration,
    OccupationGroup::legislators,                 OccupationGroup::armed_forces_officers,
    OccupationGroup::religious,                   OccupationGroup::health_associate,
    OccupationGroup::teaching,                    OccupationGroup::other,
};

std::string_view to_string(Gender g) noexcept;
std::string_view to_string(OccupationGroup g) noexcept;

/// Human-readable label of the group ("creative and performing artists").
std::string_view display_label(OccupationGroup g) noexcept;

/// Accepts "female"/"male"/"unknown" and the one-letter forms, case-insensitive.
/// An empty string parses as unknown.
std::optional<Gender> parse_gender(std::string_view text);
std::optional<OccupationGroup> parse_occupation_group(std::string_view identifier);

/// Uppercase ISO 3166-1 alpha-2 code.
struct CountryCode {
  std::string code;
  auto operator<=>(const CountryCode&) const = default;
};

/// Maps an ISO code, English country name or historical polity to an ISO alpha-2 code.
std::optional<CountryCode> normalize_country(std::string_view text);

struct Honoree {
  std::string full_name;
  Gender gender = Gender::unknown;
  std::optional<std::string> occupation_raw;
  std::optional<OccupationGroup> occupation_group;
  std::optional<CountryCode> country_of_origin;
  std::optional<Year> birth_year;
  std::optional<Year> death_year;

  bool operator==(const Honoree&) const = default;
};

/// Point or linestring in WGS84 (longitude, latitude).
using StreetGeometry = std::vector<geo::Point>;

struct StreetRecord {
  std::string city_id;
  std::string street_name;
  std::optional<std::string> district_id;
  std::optional<Year> denomination_year;
  std::optional<StreetGeometry> geometry;
  std::optional<Honoree> honoree;

  bool operator==(const StreetRecord&) const = default;
};

struct District {
  std::string district_id;
  std::string name;
  geo::MultiPolygon polygon;
};

struct CityConfig {
  std::string city_id;
  std::string display_name;
  CountryCode home_country;
  int start_decade = 0;
  std::vector<District> districts;
  std::string kb_area;           // knowledge-base item of the city, e.g. "Q90"
  std::string language = "en";   // label language for knowledge-base queries
};

enum class Metric { gender, foreigner, fhd, occupation };

std::string_view to_string(Metric m) noexcept;

/// True iff the record carries every field the metric needs.
bool is_countable(const StreetRecord& record, Metric metric) noexcept;

/// Throws DataError describing the first violated invariant.
void check_invariants(const Honoree& honoree);
void check_invariants(const StreetRecord& record);

}  // namespace streetonomics
