#pragma once

// Run configuration, read from a YAML file. Relative paths resolve against the
// directory holding the config file. See config/streetonomics.yaml for the
// annotated grammar.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "streetonomics/core.hpp"
#include "streetonomics/metrics.hpp"

namespace streetonomics {

inline constexpr std::string_view kConfigEnvVar = "STREETONOMICS_CONFIG";
inline constexpr std::string_view kDefaultConfigFile = "streetonomics.yaml";

struct CitySettings {
  CityConfig city;  // districts are loaded by the pipeline, not here
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> districts;
  std::optional<std::filesystem::path> osm_roads;
  std::optional<std::filesystem::path> annotations;
  bool transliterate = false;
};

struct RunConfig {
  std::string source_text;  // the config file, verbatim
  std::filesystem::path source_path;
  std::vector<std::string> overrides;  // command-line settings applied on top

  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> archive;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> transliteration;
  std::optional<std::filesystem::path> decisions;

  std::string endpoint{"https://query.wikidata.org/sparql"};
  std::size_t parallelism = 4;
  double rate_limit = 5.0;
  std::uint64_t seed = 0;
  std::size_t sample_size = 200;
  int bins = 5;
  RankingMode ranking_mode = RankingMode::cumulative;
  bool strict_formulae = false;
  bool within_district = false;
  bool offline = false;
  bool prompt = true;
  std::vector<std::string> metrics;  // empty = all
  std::vector<std::string> road_exclusions;

  std::vector<CitySettings> cities;

  bool metric_enabled(std::string_view id) const;
  /// Hash of the verbatim config plus overrides.
  std::string hash() const;
  /// Config text followed by the overrides, as echoed into output headers.
  std::string echo() const;
};

/// Throws UsageError on unknown keys, wrong types or missing required fields.
RunConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// --config value, else $STREETONOMICS_CONFIG, else ./streetonomics.yaml.
std::filesystem::path resolve_config_path(const std::optional<std::string>& flag);

}  // namespace streetonomics
