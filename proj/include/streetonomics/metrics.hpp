#pragma once

// Gender, foreigner, historical-decade and occupation metrics over street records.
// Every function is pure and independent of record order.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streetonomics/core.hpp"

namespace streetonomics {

/// Exact count ratio. A zero denominator means "no streets", which is
/// distinct from a 0 value ("no matching streets").
struct Proportion {
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;

  bool defined() const noexcept { return denominator > 0; }
  std::optional<double> value() const noexcept {
    if (!defined()) return std::nullopt;
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  bool operator==(const Proportion&) const = default;
};

/// Decade start year -> value. Count and fraction series carry explicit zeros
/// between their first and last decade; proportion series leave empty decades absent.
struct DecadeSeries {
  std::string metric_id;
  std::string city_id;
  std::map<int, std::optional<double>> values;
};

struct DistrictMetric {
  std::string metric_id;
  std::string city_id;
  std::map<std::string, Proportion> values;  // district_id -> share
};

enum class FormulaMode {
  corrected,  // foreigner numerator restricted to the decade, mirroring the female formula
  literal,    // foreigner numerator over all decades, denominator within the decade
};

enum class DistrictNormalization {
  city_total,      // share of all (assigned) city streets; districts sum to the city rate
  within_district, // share of the district's own streets
};

bool is_foreigner(const Honoree& honoree, const CountryCode& home_country);

Proportion f_prop_by_decade(std::span<const StreetRecord> records, Decade decade);
DecadeSeries f_prop_series(std::span<const StreetRecord> records, const std::string& city_id);

Proportion f_prop_by_district(std::span<const StreetRecord> records, std::string_view district_id,
                              DistrictNormalization norm = DistrictNormalization::city_total);
DistrictMetric f_prop_by_districts(std::span<const StreetRecord> records, const CityConfig& city,
                                   DistrictNormalization norm = DistrictNormalization::city_total);

/// Female share over all gender-countable records, regardless of decade or district.
Proportion f_prop_pooled(std::span<const StreetRecord> records);

Proportion for_prop_by_decade(std::span<const StreetRecord> records, Decade decade,
                              const CountryCode& home_country,
                              FormulaMode mode = FormulaMode::corrected);
DecadeSeries for_prop_series(std::span<const StreetRecord> records, const CityConfig& city,
                             FormulaMode mode = FormulaMode::corrected);

Proportion for_prop_by_district(std::span<const StreetRecord> records, std::string_view district_id,
                                const CountryCode& home_country,
                                DistrictNormalization norm = DistrictNormalization::city_total);
DistrictMetric for_prop_by_districts(std::span<const StreetRecord> records, const CityConfig& city,
                                     DistrictNormalization norm = DistrictNormalization::city_total);

Proportion for_prop_pooled(std::span<const StreetRecord> records, const CountryCode& home_country);

struct FhdResult {
  DecadeSeries series;
  std::size_t skipped_inverted = 0;    // birth after death
  std::size_t excluded_incomplete = 0; // honorees missing birth or death year
};

/// Focus on historical decade: each honoree adds one to every decade its
/// lifespan touches, from decade(birth) to decade(death) inclusive.
FhdResult fhd(std::span<const StreetRecord> records, const std::string& city_id = {});

/// Share of dated streets (re)named in each decade; sums to 1.
DecadeSeries denominations_by_decade(std::span<const StreetRecord> records,
                                     const std::string& city_id = {});

enum class RankingMode { cumulative, per_decade };

struct RankedGroup {
  OccupationGroup group;
  std::int64_t count = 0;
  int rank = 0;
  bool operator==(const RankedGroup&) const = default;
};

struct OccupationRanking {
  RankingMode mode = RankingMode::cumulative;
  /// Decade start -> groups with a non-zero count, best first. Ties in count
  /// fall back to group enum order.
  std::map<int, std::vector<RankedGroup>> decades;

  /// Count of every group seen in either decade (0 when absent), in enum order.
  std::map<OccupationGroup, std::int64_t> counts_at(int decade) const;
};

OccupationRanking occupation_ranking(std::span<const StreetRecord> records,
                                     RankingMode mode = RankingMode::cumulative);

/// Kendall tau-b between two score vectors aligned by item. Ties are allowed.
/// Throws std::invalid_argument for fewer than two items or mismatched sizes;
/// returns nullopt when either side is constant (tau-b undefined).
std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b);

struct HalfCenturyStability {
  int start = 0;                        // 1800, 1850, ...
  std::optional<double> mean_tau;       // absent when fewer than two decades were ranked
  std::map<int, double> pair_tau;       // decade d -> tau(d, d + 10)
  std::vector<int> missing_pairs;       // decades d whose (d, d + 10) pair could not be scored
  std::string reason;                   // why mean_tau is absent
};

inline constexpr std::array<int, 4> kDefaultHalfCenturies = {1800, 1850, 1900, 1950};

/// Mean tau-b between each decade's ranking and the next one within each
/// half-century (five pairs, e.g. 1850-1860 ... 1890-1900). Rankings are
/// compared by group counts so equal counts are ties.
std::vector<HalfCenturyStability> half_century_stability(
    const OccupationRanking& ranking, std::span<const int> starts = kDefaultHalfCenturies);

/// Drops records whose denomination decade precedes the city's start decade.
/// Undated records are kept (decade-indexed metrics ignore them anyway).
std::vector<StreetRecord> apply_start_decade(std::span<const StreetRecord> records,
                                             const CityConfig& city);

}  // namespace streetonomics
