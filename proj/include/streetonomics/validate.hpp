#pragma once

// Coverage audit: a seeded, district-stratified sample of OSM street names is
// annotated by hand, then compared against the curated honorific dataset.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "streetonomics/core.hpp"
#include "streetonomics/ingest.hpp"
#include "streetonomics/metrics.hpp"

namespace streetonomics {

/// Identifier recorded in every sampling report. Changing the generator or the
/// way it is consumed requires a new identifier.
inline constexpr std::string_view kSamplerAlgorithm = "mt19937_64/rejection-bounded/fisher-yates-v1";

struct SamplePlan {
  std::string city_id;
  std::size_t sample_size = 200;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> strata;  // district -> quota
};

/// Uniform quotas: sample_size split evenly, the remainder going one each to
/// the first districts in sorted order.
SamplePlan make_sample_plan(std::string city_id, std::span<const std::string> districts,
                            std::size_t sample_size, std::uint64_t seed);

struct SampledStreet {
  std::string street_name;
  std::string district_id;
  auto operator<=>(const SampledStreet&) const = default;
};

struct Sample {
  std::vector<SampledStreet> streets;  // sorted by district, then name
  std::map<std::string, std::size_t> realized;  // district -> drawn count after redistribution
  std::vector<std::string> warnings;
};

/// Seeded draw without replacement. Districts short of their quota give up all
/// their streets and the shortfall moves round-robin to districts with streets
/// left. Segments without a name or district are ignored. The result depends
/// only on the set of (name, district) pairs and the seed, not on input order.
Sample draw_sample(std::span<const RoadSegment> roads, const SamplePlan& plan);

/// Bounded uniform integer in [0, bound) from a 64-bit generator, by rejection.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

struct Annotation {
  std::string street_name;
  std::string district;
  std::optional<bool> is_honorific;
  Gender honoree_gender = Gender::unknown;
};

/// CSV `street_name,district,is_honorific,honoree_gender`. Throws DataError on
/// a gender given for a non-honorific street.
std::vector<Annotation> parse_annotations(std::istream& in);
std::vector<Annotation> parse_annotations(const std::filesystem::path& path);
void write_annotation_template(std::ostream& out, const Sample& sample);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval; z = 1.959963984540054 for 95 %.
std::optional<Interval> wilson_interval(std::int64_t successes, std::int64_t trials,
                                        double z = 1.959963984540054);

struct CuratedComparison {
  std::size_t osm_total = 0;
  std::size_t curated_honorific = 0;
  Proportion people_share;  // curated honorific streets / OSM streets
  Proportion female_share;  // female honorees among gender-countable curated streets
};

struct CoverageReport {
  std::size_t sampled = 0;
  Proportion honorific;                // honorific / sampled
  Proportion female_among_honorific;   // female / honorific
  std::optional<Interval> honorific_ci;
  std::optional<Interval> female_ci;
  std::optional<CuratedComparison> curated;
};

/// Throws DataError listing every row with no is_honorific value.
CoverageReport estimate_coverage(std::span<const Annotation> annotations);

CuratedComparison compare_with_curated(std::span<const StreetRecord> curated, std::size_t osm_total);

std::string coverage_json(const CoverageReport& report, std::string_view city_id);
std::string coverage_table(const CoverageReport& report, std::string_view city_id);

}  // namespace streetonomics
