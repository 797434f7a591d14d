#pragma once

// Persistent honoree cache.
//
// File layout (UTF-8, append-only, last entry for a key wins):
//
//   STREETONOMICS-CACHE<TAB>1
//   <key><TAB><record json>
//   ...
//
// Keys are fold_key() forms of honoree names and never contain tabs or
// newlines. The record JSON is a single line; get() hands back those exact
// bytes, so a cache hit is byte-identical to what was stored.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "streetonomics/core.hpp"

namespace streetonomics {

inline constexpr int kCacheFormatVersion = 1;

/// Field name -> JSON pointer-like path into the knowledge-base response that
/// supplied it, e.g. "gender" -> "results.bindings[0].gender".
using Provenance = std::map<std::string, std::string>;

struct CachedHonoree {
  Honoree honoree;
  std::string entity_id;  // empty when the knowledge base had no match
  Provenance provenance;
  std::string retrieved_at;  // ISO 8601 UTC
  std::string request_key;   // archive key of the response the fields came from
};

std::string serialize(const CachedHonoree& entry);
CachedHonoree deserialize_cached_honoree(std::string_view line);

class EnrichmentCache {
public:
  /// In-memory only.
  EnrichmentCache() = default;
  /// Loads (or creates) the file. Throws DataError on a bad header or version.
  explicit EnrichmentCache(std::filesystem::path file);

  EnrichmentCache(const EnrichmentCache&) = delete;
  EnrichmentCache& operator=(const EnrichmentCache&) = delete;

  std::optional<CachedHonoree> get(const std::string& key) const;
  /// Exact stored bytes of the record.
  std::optional<std::string> get_raw(const std::string& key) const;
  void put(const std::string& key, const CachedHonoree& entry);
  std::size_t size() const;

private:
  std::filesystem::path file_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace streetonomics
