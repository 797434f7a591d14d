#include "streetonomics/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include <yaml-cpp/yaml.h>

#include "streetonomics/error.hpp"
#include "streetonomics/hash.hpp"

namespace streetonomics {

namespace {

const std::set<std::string> kMetricIds = {"f_prop",      "for_prop",           "fhd",
                                          "denominations", "occupation_ranking", "stability"};

void reject_unknown(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const std::string& where) {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw UsageError(where + ": '" + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<std::filesystem::path> optional_path(const YAML::Node& node, const std::string& key,
                                                   const std::filesystem::path& base,
                                                   const std::string& where) {
  if (!node[key] || node[key].IsNull()) return std::nullopt;
  return resolve(base, scalar<std::string>(node, key, where));
}

}  // namespace

bool RunConfig::metric_enabled(std::string_view id) const {
  return metrics.empty() || std::find(metrics.begin(), metrics.end(), id) != metrics.end();
}

std::string RunConfig::echo() const {
  std::string out = source_text;
  if (!out.empty() && out.back() != '\n') out.push_back('\n');
  for (const auto& o : overrides) out += "# override: " + o + "\n";
  return out;
}

std::string RunConfig::hash() const { return sha256_hex(echo()); }

RunConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw UsageError("config must be a mapping");
  reject_unknown(root,
                 {"output_dir", "cache", "archive", "lexicon", "transliteration", "decisions",
                  "endpoint", "parallelism", "rate_limit", "seed", "sample_size", "bins",
                  "ranking_mode", "strict_formulae", "within_district", "offline", "prompt",
                  "metrics", "road_exclusions", "cities"},
                 "config");
  const std::string where = "config";
  RunConfig cfg;
  cfg.source_text = std::string(yaml_text);
  if (root["output_dir"]) cfg.output_dir = resolve(base_dir, scalar<std::string>(root, "output_dir", where));
  else cfg.output_dir = resolve(base_dir, "out");
  cfg.cache = optional_path(root, "cache", base_dir, where);
  cfg.archive = optional_path(root, "archive", base_dir, where);
  cfg.lexicon = optional_path(root, "lexicon", base_dir, where);
  cfg.transliteration = optional_path(root, "transliteration", base_dir, where);
  cfg.decisions = optional_path(root, "decisions", base_dir, where);
  if (root["endpoint"]) cfg.endpoint = scalar<std::string>(root, "endpoint", where);
  if (root["parallelism"]) cfg.parallelism = scalar<std::size_t>(root, "parallelism", where);
  if (root["rate_limit"]) cfg.rate_limit = scalar<double>(root, "rate_limit", where);
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root, "seed", where);
  if (root["sample_size"]) cfg.sample_size = scalar<std::size_t>(root, "sample_size", where);
  if (root["bins"]) cfg.bins = scalar<int>(root, "bins", where);
  if (root["strict_formulae"]) cfg.strict_formulae = scalar<bool>(root, "strict_formulae", where);
  if (root["within_district"]) cfg.within_district = scalar<bool>(root, "within_district", where);
  if (root["offline"]) cfg.offline = scalar<bool>(root, "offline", where);
  if (root["prompt"]) cfg.prompt = scalar<bool>(root, "prompt", where);
  if (root["ranking_mode"]) {
    const auto mode = scalar<std::string>(root, "ranking_mode", where);
    if (mode == "cumulative") cfg.ranking_mode = RankingMode::cumulative;
    else if (mode == "per_decade") cfg.ranking_mode = RankingMode::per_decade;
    else throw UsageError("config: ranking_mode must be cumulative or per_decade");
  }
  if (root["metrics"]) {
    cfg.metrics = scalar<std::vector<std::string>>(root, "metrics", where);
    for (const auto& m : cfg.metrics) {
      if (!kMetricIds.contains(m)) throw UsageError("config: unknown metric '" + m + "'");
    }
  }
  if (root["road_exclusions"]) {
    cfg.road_exclusions = scalar<std::vector<std::string>>(root, "road_exclusions", where);
  } else {
    cfg.road_exclusions = {"motorway", "trunk", "cycleway", "path"};
  }
  if (cfg.parallelism == 0) throw UsageError("config: parallelism must be at least 1");
  if (!(cfg.rate_limit > 0)) throw UsageError("config: rate_limit must be positive");
  if (cfg.bins < 2) throw UsageError("config: bins must be at least 2");

  if (!root["cities"] || !root["cities"].IsSequence() || root["cities"].size() == 0) {
    throw UsageError("config: 'cities' must be a non-empty list");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root["cities"].size(); ++i) {
    const YAML::Node node = root["cities"][i];
    const std::string cw = "config: cities[" + std::to_string(i) + "]";
    if (!node.IsMap()) throw UsageError(cw + " must be a mapping");
    reject_unknown(node,
                   {"id", "name", "home_country", "start_decade", "dataset", "districts", "osm_roads",
                    "annotations", "kb_area", "language", "transliterate"},
                   cw);
    for (const char* required : {"id", "home_country", "start_decade"}) {
      if (!node[required]) throw UsageError(cw + ": missing '" + required + "'");
    }
    CitySettings c;
    c.city.city_id = scalar<std::string>(node, "id", cw);
    if (c.city.city_id.empty() || c.city.city_id.find_first_of("/\\ .") != std::string::npos) {
      throw UsageError(cw + ": id must be a plain identifier");
    }
    if (!ids.insert(c.city.city_id).second) throw UsageError(cw + ": duplicate city id");
    c.city.display_name = node["name"] ? scalar<std::string>(node, "name", cw) : c.city.city_id;
    const auto home = normalize_country(scalar<std::string>(node, "home_country", cw));
    if (!home) throw UsageError(cw + ": unknown home_country");
    c.city.home_country = *home;
    c.city.start_decade = scalar<int>(node, "start_decade", cw);
    if (node["kb_area"]) c.city.kb_area = scalar<std::string>(node, "kb_area", cw);
    if (node["language"]) c.city.language = scalar<std::string>(node, "language", cw);
    if (node["transliterate"]) c.transliterate = scalar<bool>(node, "transliterate", cw);
    c.dataset = optional_path(node, "dataset", base_dir, cw);
    c.districts = optional_path(node, "districts", base_dir, cw);
    c.osm_roads = optional_path(node, "osm_roads", base_dir, cw);
    c.annotations = optional_path(node, "annotations", base_dir, cw);
    cfg.cities.push_back(std::move(c));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
  auto cfg = parse_config(read_file(path), path.parent_path().empty() ? "." : path.parent_path());
  cfg.source_path = path;
  return cfg;
}

std::filesystem::path resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) return env;
  return std::string(kDefaultConfigFile);
}

}  // namespace streetonomics
