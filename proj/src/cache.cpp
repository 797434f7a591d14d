#include "streetonomics/cache.hpp"

#include <fstream>
#include <mutex>

#include <json.hpp>

#include "streetonomics/error.hpp"

namespace streetonomics {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kMagic = "STREETONOMICS-CACHE";

template <typename T>
void put_optional(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v; else j[key] = nullptr;
}

}  // namespace

std::string serialize(const CachedHonoree& entry) {
  const Honoree& h = entry.honoree;
  ordered_json hj;
  hj["full_name"] = h.full_name;
  hj["gender"] = std::string(to_string(h.gender));
  put_optional(hj, "occupation_raw", h.occupation_raw);
  hj["occupation_group"] = h.occupation_group ? ordered_json(std::string(to_string(*h.occupation_group))) : ordered_json();
  hj["country"] = h.country_of_origin ? ordered_json(h.country_of_origin->code) : ordered_json();
  put_optional(hj, "birth_year", h.birth_year);
  put_optional(hj, "death_year", h.death_year);

  ordered_json j;
  j["entity_id"] = entry.entity_id;
  j["honoree"] = std::move(hj);
  j["provenance"] = entry.provenance;
  j["request_key"] = entry.request_key;
  j["retrieved_at"] = entry.retrieved_at;
  return j.dump();
}

CachedHonoree deserialize_cached_honoree(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    CachedHonoree e;
    e.entity_id = j.at("entity_id").get<std::string>();
    e.provenance = j.at("provenance").get<Provenance>();
    e.request_key = j.value("request_key", "");
    e.retrieved_at = j.value("retrieved_at", "");
    const auto& hj = j.at("honoree");
    Honoree& h = e.honoree;
    h.full_name = hj.at("full_name").get<std::string>();
    h.gender = parse_gender(hj.at("gender").get<std::string>()).value_or(Gender::unknown);
    if (!hj["occupation_raw"].is_null()) h.occupation_raw = hj["occupation_raw"].get<std::string>();
    if (!hj["occupation_group"].is_null()) {
      h.occupation_group = parse_occupation_group(hj["occupation_group"].get<std::string>());
    }
    if (!hj["country"].is_null()) h.country_of_origin = CountryCode{hj["country"].get<std::string>()};
    if (!hj["birth_year"].is_null()) h.birth_year = hj["birth_year"].get<Year>();
    if (!hj["death_year"].is_null()) h.death_year = hj["death_year"].get<Year>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("corrupt cache record: ") + ex.what());
  }
}

EnrichmentCache::EnrichmentCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(file_)) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream out(file_, std::ios::binary);
    if (!out) throw DataError("cannot create cache " + file_.string());
    out << kMagic << '\t' << kCacheFormatVersion << '\n';
    return;
  }
  std::ifstream in(file_, std::ios::binary);
  std::string line;
  if (!std::getline(in, line)) throw DataError("cache " + file_.string() + " has no header");
  const auto tab = line.find('\t');
  if (tab == std::string::npos || std::string_view(line).substr(0, tab) != kMagic) {
    throw DataError("cache " + file_.string() + " has an unrecognized header");
  }
  if (line.substr(tab + 1) != std::to_string(kCacheFormatVersion)) {
    throw DataError("cache " + file_.string() + " has unsupported version " + line.substr(tab + 1));
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto sep = line.find('\t');
    if (sep == std::string::npos) {
      throw DataError("cache " + file_.string() + ":" + std::to_string(lineno) + ": missing key separator");
    }
    entries_[line.substr(0, sep)] = line.substr(sep + 1);
  }
}

std::optional<CachedHonoree> EnrichmentCache::get(const std::string& key) const {
  auto raw = get_raw(key);
  if (!raw) return std::nullopt;
  return deserialize_cached_honoree(*raw);
}

std::optional<std::string> EnrichmentCache::get_raw(const std::string& key) const {
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void EnrichmentCache::put(const std::string& key, const CachedHonoree& entry) {
  if (key.find_first_of("\t\n\r") != std::string::npos) {
    throw DataError("cache key contains a control separator");
  }
  std::string record = serialize(entry);
  std::unique_lock lock(mutex_);
  if (!file_.empty()) {
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    out << key << '\t' << record << '\n';
    out.flush();
    if (!out) throw DataError("cannot append to cache " + file_.string());
  }
  entries_[key] = std::move(record);
}

std::size_t EnrichmentCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace streetonomics
