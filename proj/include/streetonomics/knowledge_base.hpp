#pragma once

// SPARQL client for resolving streets and honorees against a Wikidata-style
// knowledge base.

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "streetonomics/cache.hpp"
#include "streetonomics/core.hpp"
#include "streetonomics/lexicon.hpp"
#include "streetonomics/transport.hpp"

namespace streetonomics {

inline constexpr std::string_view kDefaultEndpoint = "https://query.wikidata.org/sparql";

struct EponymCandidate {
  std::string entity_id;
  std::string label;
  bool is_person = false;
  double confidence = 0.0;  // 1 / number of eponyms linked from the street
};

struct NamedAfter {
  std::string street_entity_id;
  std::string street_name;
  EponymCandidate eponym;
};

struct AmbiguousHonoree {
  struct Candidate {
    std::string entity_id;
    std::string label;
    std::optional<Year> birth_year;
  };
  std::string name;
  std::vector<Candidate> candidates;
};

struct ResolvedHonoree {
  CachedHonoree entry;
  bool from_cache = false;
};

using Resolution = std::variant<ResolvedHonoree, AmbiguousHonoree>;

/// Manual choices for ambiguous names: fold_key(name) -> entity id.
using Disambiguation = std::map<std::string, std::string>;

std::string build_named_after_query(const CityConfig& city);
std::string build_honoree_query(std::string_view name, std::string_view language);
std::string build_entity_query(std::string_view entity_id);

/// Parses a SPARQL JSON result document; throws DataError on malformed payloads.
std::vector<NamedAfter> parse_named_after(std::string_view payload);

/// Year of an xsd:dateTime literal, using BC = negative year (so XSD year 0 is 1 BC -> -1).
std::optional<Year> parse_sparql_year(std::string_view datetime);

class KnowledgeBaseClient {
public:
  using Clock = std::function<std::string()>;

  KnowledgeBaseClient(Transport& transport, std::string endpoint, RateLimiter* limiter = nullptr);

  /// Streets located in the city with a named-after link, one candidate per
  /// (street, eponym) pair.
  std::vector<NamedAfter> query_named_after(const CityConfig& city);

  /// Cache-first lookup. Fields the response does not carry stay absent.
  Resolution resolve_honoree(std::string_view name, EnrichmentCache& cache,
                             const Disambiguation* decisions = nullptr);

  /// Parses a person-query payload into an honoree (exposed for tests).
  static Resolution interpret_honoree_payload(std::string_view name, std::string_view payload,
                                              std::string_view request_key);

  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_language(std::string language) { language_ = std::move(language); }
  std::size_t network_queries() const noexcept { return queries_; }

private:
  std::string fetch(const std::string& query, std::string* key_out = nullptr);

  Transport& transport_;
  std::string endpoint_;
  RateLimiter* limiter_;
  Clock clock_;
  std::string language_ = "en";
  std::atomic<std::size_t> queries_{0};
};

struct EnrichOptions {
  std::size_t parallelism = 4;
  const Disambiguation* decisions = nullptr;
};

struct EnrichmentOutcome {
  std::vector<StreetRecord> records;
  std::vector<AmbiguousHonoree> ambiguous;
  UnmatchedLabels unmatched_occupations;
  std::size_t looked_up = 0;
  std::size_t cache_hits = 0;
  std::size_t complete = 0;  // records with every honoree field populated
};

/// Fills absent honoree fields from the knowledge base (never overwriting
/// curated values) and maps raw occupations to groups.
EnrichmentOutcome enrich_records(std::vector<StreetRecord> records, KnowledgeBaseClient* client,
                                 EnrichmentCache& cache, const OccupationLexicon& lexicon,
                                 const EnrichOptions& options);

bool needs_lookup(const StreetRecord& record);

}  // namespace streetonomics
