#include "streetonomics/knowledge_base.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <exception>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "streetonomics/error.hpp"
#include "streetonomics/text.hpp"

namespace streetonomics {

namespace {

using nlohmann::json;

constexpr std::string_view kEntityPrefix = "http://www.wikidata.org/entity/";

bool is_item_id(std::string_view s) {
  if (s.size() < 2 || s[0] != 'Q') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string entity_of(std::string_view uri) {
  const auto slash = uri.rfind('/');
  return std::string(slash == std::string_view::npos ? uri : uri.substr(slash + 1));
}

std::string sparql_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out += '"';
  return out;
}

std::string checked_language(std::string_view lang) {
  std::string out;
  for (char c : lang) {
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '-')) {
      throw UsageError("invalid label language '" + std::string(lang) + "'");
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out.empty() ? "en" : out;
}

[[noreturn]] void malformed(std::string_view what, std::string_view payload) {
  std::cerr << "malformed knowledge-base response (" << what << "); payload follows:\n"
            << payload.substr(0, 4096) << (payload.size() > 4096 ? "\n[...truncated]" : "") << "\n";
  throw DataError("malformed knowledge-base response: " + std::string(what));
}

const json& bindings_of(const json& doc, std::string_view payload) {
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_object() ||
      !doc["results"].contains("bindings") || !doc["results"]["bindings"].is_array()) {
    malformed("missing results.bindings", payload);
  }
  return doc["results"]["bindings"];
}

json parse_payload(std::string_view payload) {
  try {
    return json::parse(payload);
  } catch (const json::parse_error& e) {
    malformed(e.what(), payload);
  }
}

std::optional<std::string> value_of(const json& binding, const char* var) {
  if (!binding.is_object() || !binding.contains(var)) return std::nullopt;
  const auto& cell = binding[var];
  if (!cell.is_object() || !cell.contains("value") || !cell["value"].is_string()) return std::nullopt;
  return cell["value"].get<std::string>();
}

std::optional<Gender> gender_of_item(std::string_view item) {
  if (item == "Q6581072" || item == "Q1052281") return Gender::female;
  if (item == "Q6581097" || item == "Q2449503") return Gender::male;
  return std::nullopt;
}

std::string pointer(std::size_t index, const char* var) {
  return "results.bindings[" + std::to_string(index) + "]." + var;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

constexpr std::string_view kPersonFields = R"(
  OPTIONAL { ?person wdt:P21 ?gender . }
  OPTIONAL { ?person wdt:P569 ?birth . }
  OPTIONAL { ?person wdt:P570 ?death . }
  OPTIONAL { ?person wdt:P27 ?country . ?country wdt:P297 ?countryCode . }
  OPTIONAL { ?person wdt:P106 ?occupation . }
)";

}  // namespace

std::string build_named_after_query(const CityConfig& city) {
  if (!is_item_id(city.kb_area)) {
    throw UsageError("city '" + city.city_id + "' needs a knowledge-base area id like Q90, got '" +
                     city.kb_area + "'");
  }
  const auto lang = checked_language(city.language);
  return "SELECT ?street ?streetLabel ?eponym ?eponymLabel ?isPerson WHERE {\n"
         "  ?street wdt:P31/wdt:P279* wd:Q79007 ;\n"
         "          wdt:P131+ wd:" + city.kb_area + " ;\n"
         "          wdt:P138 ?eponym .\n"
         "  BIND(EXISTS { ?eponym wdt:P31 wd:Q5 } AS ?isPerson)\n"
         "  SERVICE wikibase:label { bd:serviceParam wikibase:language \"" + lang + ",en\". }\n"
         "}\nORDER BY ?street ?eponym\n";
}

std::string build_honoree_query(std::string_view name, std::string_view language) {
  const auto lang = checked_language(language);
  return "SELECT ?person ?personLabel ?gender ?birth ?death ?countryCode ?occupationLabel WHERE {\n"
         "  ?person wdt:P31 wd:Q5 ; rdfs:label " + sparql_string(name) + "@" + lang + " ." +
         std::string(kPersonFields) +
         "  SERVICE wikibase:label { bd:serviceParam wikibase:language \"" + lang + ",en\". }\n"
         "}\n";
}

std::string build_entity_query(std::string_view entity_id) {
  if (!is_item_id(entity_id)) throw UsageError("not a knowledge-base item id: " + std::string(entity_id));
  return "SELECT ?person ?personLabel ?gender ?birth ?death ?countryCode ?occupationLabel WHERE {\n"
         "  VALUES ?person { wd:" + std::string(entity_id) + " }" + std::string(kPersonFields) +
         "  SERVICE wikibase:label { bd:serviceParam wikibase:language \"en\". }\n"
         "}\n";
}

std::optional<Year> parse_sparql_year(std::string_view datetime) {
  datetime = text::trim(datetime);
  bool negative = false;
  if (!datetime.empty() && (datetime[0] == '-' || datetime[0] == '+')) {
    negative = datetime[0] == '-';
    datetime.remove_prefix(1);
  }
  const auto dash = datetime.find('-');
  const auto digits = datetime.substr(0, dash);
  if (digits.empty()) return std::nullopt;
  Year year = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), year);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  if (negative) year = -year;
  // XSD 1.1 counts 1 BC as year 0; BC years here are plain negatives.
  if (year <= 0) year -= 1;
  return year;
}

std::vector<NamedAfter> parse_named_after(std::string_view payload) {
  const json doc = parse_payload(payload);
  const json& bindings = bindings_of(doc, payload);

  std::vector<NamedAfter> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, std::size_t> eponyms_per_street;
  for (const auto& b : bindings) {
    const auto street = value_of(b, "street");
    const auto eponym = value_of(b, "eponym");
    if (!street || !eponym) malformed("binding without street or eponym", payload);
    NamedAfter row;
    row.street_entity_id = entity_of(*street);
    row.eponym.entity_id = entity_of(*eponym);
    if (!seen.emplace(row.street_entity_id, row.eponym.entity_id).second) continue;
    row.street_name = value_of(b, "streetLabel").value_or(row.street_entity_id);
    row.eponym.label = value_of(b, "eponymLabel").value_or(row.eponym.entity_id);
    const auto person = value_of(b, "isPerson").value_or("false");
    row.eponym.is_person = person == "true" || person == "1";
    ++eponyms_per_street[row.street_entity_id];
    out.push_back(std::move(row));
  }
  for (auto& row : out) {
    row.eponym.confidence = 1.0 / static_cast<double>(eponyms_per_street[row.street_entity_id]);
  }
  return out;
}

KnowledgeBaseClient::KnowledgeBaseClient(Transport& transport, std::string endpoint,
                                         RateLimiter* limiter)
    : transport_(transport), endpoint_(std::move(endpoint)), limiter_(limiter), clock_(utc_now) {}

std::string KnowledgeBaseClient::fetch(const std::string& query, std::string* key_out) {
  HttpRequest request;
  request.url = endpoint_ + "?format=json&query=" + url_encode(query);
  request.headers = {{"Accept", "application/sparql-results+json"},
                     {"User-Agent", "streetonomics/" STREETONOMICS_VERSION}};
  if (key_out) *key_out = request_key(request);
  if (limiter_) limiter_->acquire();
  ++queries_;
  HttpResponse response = transport_.send(request);
  if (response.status != 200) {
    throw NetworkError("knowledge base returned HTTP " + std::to_string(response.status));
  }
  return std::move(response.body);
}

std::vector<NamedAfter> KnowledgeBaseClient::query_named_after(const CityConfig& city) {
  return parse_named_after(fetch(build_named_after_query(city)));
}

Resolution KnowledgeBaseClient::interpret_honoree_payload(std::string_view name,
                                                          std::string_view payload,
                                                          std::string_view request_key) {
  const json doc = parse_payload(payload);
  const json& bindings = bindings_of(doc, payload);

  std::vector<std::string> persons;
  for (const auto& b : bindings) {
    const auto p = value_of(b, "person");
    if (!p) malformed("binding without person", payload);
    const auto id = entity_of(*p);
    if (std::find(persons.begin(), persons.end(), id) == persons.end()) persons.push_back(id);
  }

  if (persons.size() > 1) {
    AmbiguousHonoree amb;
    amb.name = std::string(name);
    for (const auto& id : persons) {
      AmbiguousHonoree::Candidate c;
      c.entity_id = id;
      for (const auto& b : bindings) {
        if (entity_of(*value_of(b, "person")) != id) continue;
        if (c.label.empty()) c.label = value_of(b, "personLabel").value_or("");
        if (!c.birth_year) {
          if (auto v = value_of(b, "birth")) c.birth_year = parse_sparql_year(*v);
        }
      }
      amb.candidates.push_back(std::move(c));
    }
    return amb;
  }

  ResolvedHonoree resolved;
  CachedHonoree& entry = resolved.entry;
  entry.request_key = std::string(request_key);
  entry.honoree.full_name = std::string(name);
  if (persons.empty()) return resolved;

  entry.entity_id = persons.front();
  Honoree& h = entry.honoree;
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    const auto& b = bindings[i];
    if (!entry.provenance.contains("full_name")) {
      if (auto v = value_of(b, "personLabel"); v && !is_item_id(*v)) {
        h.full_name = *v;
        entry.provenance["full_name"] = pointer(i, "personLabel");
      }
    }
    if (!entry.provenance.contains("gender")) {
      if (auto v = value_of(b, "gender")) {
        if (auto g = gender_of_item(entity_of(*v))) {
          h.gender = *g;
          entry.provenance["gender"] = pointer(i, "gender");
        }
      }
    }
    if (!h.birth_year) {
      if (auto v = value_of(b, "birth")) {
        if ((h.birth_year = parse_sparql_year(*v))) entry.provenance["birth_year"] = pointer(i, "birth");
      }
    }
    if (!h.death_year) {
      if (auto v = value_of(b, "death")) {
        if ((h.death_year = parse_sparql_year(*v))) entry.provenance["death_year"] = pointer(i, "death");
      }
    }
    if (!h.country_of_origin) {
      if (auto v = value_of(b, "countryCode")) {
        if ((h.country_of_origin = normalize_country(*v))) entry.provenance["country"] = pointer(i, "countryCode");
      }
    }
    if (!h.occupation_raw) {
      if (auto v = value_of(b, "occupationLabel"); v && !is_item_id(*v)) {
        h.occupation_raw = *v;
        entry.provenance["occupation_raw"] = pointer(i, "occupationLabel");
      }
    }
  }
  if (h.birth_year && h.death_year && *h.birth_year > *h.death_year) {
    // Contradictory dates: keep neither rather than pick one.
    h.birth_year.reset();
    h.death_year.reset();
    entry.provenance.erase("birth_year");
    entry.provenance.erase("death_year");
  }
  return resolved;
}

Resolution KnowledgeBaseClient::resolve_honoree(std::string_view name, EnrichmentCache& cache,
                                                const Disambiguation* decisions) {
  const auto trimmed = text::trim(name);
  if (trimmed.empty()) throw UsageError("resolve_honoree: empty name");
  const std::string key = text::fold_key(trimmed);
  if (auto hit = cache.get(key)) return ResolvedHonoree{std::move(*hit), true};

  std::string query;
  if (decisions) {
    if (auto it = decisions->find(key); it != decisions->end()) query = build_entity_query(it->second);
  }
  if (query.empty()) query = build_honoree_query(trimmed, language_);

  std::string request_key;
  const std::string payload = fetch(query, &request_key);
  Resolution result = interpret_honoree_payload(trimmed, payload, request_key);
  if (auto* resolved = std::get_if<ResolvedHonoree>(&result)) {
    resolved->entry.retrieved_at = clock_();
    cache.put(key, resolved->entry);
  }
  return result;
}

bool needs_lookup(const StreetRecord& record) {
  if (!record.honoree) return false;
  const Honoree& h = *record.honoree;
  return h.gender == Gender::unknown || !h.country_of_origin || !h.birth_year || !h.death_year ||
         (!h.occupation_raw && !h.occupation_group);
}

EnrichmentOutcome enrich_records(std::vector<StreetRecord> records, KnowledgeBaseClient* client,
                                 EnrichmentCache& cache, const OccupationLexicon& lexicon,
                                 const EnrichOptions& options) {
  EnrichmentOutcome out;

  std::vector<std::string> names;  // display forms, unique by key, in first-seen order
  std::map<std::string, std::size_t> name_index;
  if (client) {
    for (const auto& r : records) {
      if (!needs_lookup(r)) continue;
      const auto key = text::fold_key(r.honoree->full_name);
      if (key.empty() || name_index.contains(key)) continue;
      name_index.emplace(key, names.size());
      names.push_back(r.honoree->full_name);
    }
  }

  std::vector<std::optional<Resolution>> results(names.size());
  if (!names.empty()) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next++;
        if (i >= names.size()) return;
        {
          std::lock_guard lock(failure_mutex);
          if (failure) return;
        }
        try {
          results[i] = client->resolve_honoree(names[i], cache, options.decisions);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(options.parallelism, 1, names.size());
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
  }

  for (const auto& r : results) {
    if (!r) continue;
    ++out.looked_up;
    if (const auto* amb = std::get_if<AmbiguousHonoree>(&*r)) {
      out.ambiguous.push_back(*amb);
    } else if (std::get<ResolvedHonoree>(*r).from_cache) {
      ++out.cache_hits;
    }
  }
  std::sort(out.ambiguous.begin(), out.ambiguous.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  for (auto& rec : records) {
    if (!rec.honoree) continue;
    Honoree& h = *rec.honoree;
    if (client && needs_lookup(rec)) {
      const auto it = name_index.find(text::fold_key(h.full_name));
      if (it != name_index.end() && results[it->second]) {
        if (const auto* res = std::get_if<ResolvedHonoree>(&*results[it->second])) {
          const Honoree& kb = res->entry.honoree;
          if (h.gender == Gender::unknown) h.gender = kb.gender;
          if (!h.country_of_origin) h.country_of_origin = kb.country_of_origin;
          if (!h.occupation_raw && !h.occupation_group) h.occupation_raw = kb.occupation_raw;
          if (!h.birth_year && !h.death_year) {
            h.birth_year = kb.birth_year;
            h.death_year = kb.death_year;
          } else if (!h.birth_year && kb.birth_year && *kb.birth_year <= *h.death_year) {
            h.birth_year = kb.birth_year;
          } else if (!h.death_year && kb.death_year && *h.birth_year <= *kb.death_year) {
            h.death_year = kb.death_year;
          }
        }
      }
    }
    if (!h.occupation_group && h.occupation_raw) {
      h.occupation_group = map_occupation(*h.occupation_raw, lexicon, &out.unmatched_occupations);
    }
    if (h.gender != Gender::unknown && h.country_of_origin && h.birth_year && h.death_year &&
        h.occupation_group) {
      ++out.complete;
    }
  }
  out.records = std::move(records);
  return out;
}

}  // namespace streetonomics
