#include "streetonomics/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "streetonomics/cache.hpp"
#include "streetonomics/csv.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/hash.hpp"
#include "streetonomics/ingest.hpp"
#include "streetonomics/knowledge_base.hpp"
#include "streetonomics/lexicon.hpp"
#include "streetonomics/metrics.hpp"
#include "streetonomics/spatial.hpp"
#include "streetonomics/text.hpp"
#include "streetonomics/transport.hpp"
#include "streetonomics/validate.hpp"

namespace streetonomics {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kStampDir = ".stamps";

std::string year_text(std::optional<Year> y) { return y ? std::to_string(*y) : std::string(); }

// Period style: "60 B.C." for negative years.
std::string period_year(Year y) { return y < 0 ? std::to_string(-y) + " B.C." : std::to_string(y); }

std::string value_text(const Proportion& p) {
  const auto v = p.value();
  return v ? format_value(*v) : std::string();
}

std::string rows_to_string(const std::string& header, const std::vector<std::vector<std::string>>& rows,
                           std::initializer_list<std::string_view> columns) {
  std::ostringstream ss;
  ss << header;
  csv::write_row(ss, columns);
  for (const auto& r : rows) csv::write_row(ss, r);
  return ss.str();
}

std::vector<District> load_districts(const CitySettings& s) {
  if (!s.districts) return {};
  return parse_districts(*s.districts);
}

Disambiguation load_decisions(const std::optional<fs::path>& path) {
  Disambiguation out;
  if (!path || !fs::exists(*path)) return out;
  std::ifstream in(*path);
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) return out;
  csv::Header header(*header_row);
  const std::string_view required[] = {"honoree_name", "entity_id"};
  if (auto missing = header.first_missing(required)) {
    throw DataError("decisions file " + path->string() + ": missing column " + *missing);
  }
  const auto name_col = *header.find("honoree_name");
  const auto id_col = *header.find("entity_id");
  while (auto row = reader.next()) {
    if (row->size() <= std::max(name_col, id_col)) continue;
    const auto id = text::trim((*row)[id_col]);
    if (!id.empty()) out[text::fold_key((*row)[name_col])] = std::string(id);
  }
  return out;
}

// Everything the metrics, map and bundle steps derive from one city's records.
struct CityAnalysis {
  CityConfig city;
  std::vector<StreetRecord> records;
  std::vector<StreetRecord> dated;  // start-decade filter applied
  AssignmentSummary assignment;
  bool has_polygons = false;
  FhdResult fhd;
  DecadeSeries denominations;
  std::vector<std::pair<int, Proportion>> f_decades;
  std::vector<std::pair<int, Proportion>> for_decades;
  DistrictMetric f_district;
  DistrictMetric for_district;
  Proportion f_pooled;
  Proportion for_pooled;
  OccupationRanking ranking;
  std::vector<HalfCenturyStability> stability;

  std::optional<std::pair<int, double>> peak_f_prop() const {
    std::optional<std::pair<int, double>> best;
    for (const auto& [d, p] : f_decades) {
      if (auto v = p.value(); v && (!best || *v > best->second)) best = std::pair{d, *v};
    }
    return best;
  }
};

CityAnalysis analyse(const CitySettings& s, const fs::path& enriched, const RunConfig& cfg) {
  CityAnalysis a;
  a.city = s.city;
  a.city.districts = load_districts(s);
  a.has_polygons = !a.city.districts.empty();
  a.records = parse_curated_dataset(enriched, a.city).records;
  if (a.has_polygons) {
    const DistrictIndex index(a.city.districts);
    a.assignment = assign_districts(a.records, index);
  } else {
    std::set<std::string> ids;
    for (const auto& r : a.records) {
      if (r.district_id && !r.district_id->empty()) ids.insert(*r.district_id);
    }
    for (const auto& id : ids) a.city.districts.push_back(District{id, id, {}});
  }
  a.dated = apply_start_decade(a.records, a.city);

  const auto mode = cfg.strict_formulae ? FormulaMode::literal : FormulaMode::corrected;
  const auto norm =
      cfg.within_district ? DistrictNormalization::within_district : DistrictNormalization::city_total;

  a.fhd = fhd(a.records, a.city.city_id);
  a.denominations = denominations_by_decade(a.records, a.city.city_id);
  std::optional<int> lo, hi;
  for (const auto& r : a.dated) {
    if (!r.denomination_year) continue;
    const int d = decade_of(*r.denomination_year).start_year();
    lo = lo ? std::min(*lo, d) : d;
    hi = hi ? std::max(*hi, d) : d;
  }
  if (lo) {
    for (int d = *lo; d <= *hi; d += 10) {
      const auto decade = Decade::from_start(d);
      a.f_decades.emplace_back(d, f_prop_by_decade(a.dated, decade));
      a.for_decades.emplace_back(d, for_prop_by_decade(a.dated, decade, a.city.home_country, mode));
    }
  }
  a.f_district = f_prop_by_districts(a.records, a.city, norm);
  a.for_district = for_prop_by_districts(a.records, a.city, norm);
  a.f_pooled = f_prop_pooled(a.records);
  a.for_pooled = for_prop_pooled(a.records, a.city.home_country);
  a.ranking = occupation_ranking(a.dated, cfg.ranking_mode);
  a.stability = half_century_stability(a.ranking);
  return a;
}

std::vector<std::vector<std::string>> decade_rows(const std::vector<std::pair<int, Proportion>>& series) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [d, p] : series) {
    rows.push_back({std::to_string(d), std::to_string(p.numerator), std::to_string(p.denominator),
                    value_text(p)});
  }
  return rows;
}

std::vector<std::vector<std::string>> district_rows(const DistrictMetric& m) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [id, p] : m.values) {
    rows.push_back({id, std::to_string(p.numerator), std::to_string(p.denominator), value_text(p)});
  }
  return rows;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

Pipeline::Pipeline(RunConfig config, std::ostream& log, std::istream* prompt_in)
    : config_(std::move(config)), config_hash_(config_.hash()), log_(log), prompt_in_(prompt_in) {
  auto check = [](const std::optional<fs::path>& p, const std::string& what) {
    if (p && !fs::exists(*p)) throw UsageError(what + " not found: " + p->string());
  };
  check(config_.lexicon, "lexicon");
  check(config_.transliteration, "transliteration table");
  if (config_.offline) {
    if (!config_.archive) throw UsageError("--offline needs an 'archive' directory in the config");
    if (!fs::is_directory(*config_.archive)) {
      throw UsageError("response archive not found: " + config_.archive->string());
    }
  }
  for (const auto& c : config_.cities) {
    const std::string where = "city '" + c.city.city_id + "': ";
    check(c.dataset, where + "dataset");
    check(c.districts, where + "districts");
    check(c.osm_roads, where + "osm_roads");
    check(c.annotations, where + "annotations");
  }
}

fs::path Pipeline::city_dir(const CitySettings& city) const { return config_.output_dir / city.city.city_id; }

void Pipeline::warn(const std::string& city, const std::string& message) {
  ++warnings_;
  log_ << "warning: [" << city << "] " << message << "\n";
}

fs::path Pipeline::require(const CitySettings& city, const std::string& file,
                           const std::string& producer) const {
  const auto path = city_dir(city) / file;
  if (!fs::exists(path)) {
    throw DataError("missing " + path.string() + "; run `streetonomics " + producer + "` first");
  }
  return path;
}

std::string Pipeline::csv_header(const std::string& stage, const std::string& city,
                                 const std::vector<Input>& inputs) const {
  std::ostringstream ss;
  ss << "# generator: streetonomics " << kToolVersion << "\n";
  ss << "# stage: " << stage << "\n";
  if (!city.empty()) ss << "# city: " << city << "\n";
  ss << "# config_sha256: " << config_hash_ << "\n";
  for (const auto& in : inputs) ss << "# input: " << in.label << " sha256=" << in.sha256 << "\n";
  ss << "# config:\n";
  std::istringstream cfg(config_.echo());
  for (std::string line; std::getline(cfg, line);) ss << "#   " << line << "\n";
  return ss.str();
}

std::string Pipeline::json_metadata(const std::string& stage, const std::string& city,
                                    const std::vector<Input>& inputs) const {
  json m;
  m["generator"] = "streetonomics " + std::string(kToolVersion);
  m["stage"] = stage;
  if (!city.empty()) m["city"] = city;
  m["config_sha256"] = config_hash_;
  json ins = json::array();
  for (const auto& in : inputs) ins.push_back({{"path", in.label}, {"sha256", in.sha256}});
  m["inputs"] = ins;
  m["config"] = config_.echo();
  return m.dump();
}

StageResult Pipeline::run_stage(const CitySettings& city, const std::string& stage,
                                const std::vector<fs::path>& input_files, StageBody body) {
  const auto base = config_.source_path.empty() ? fs::current_path() : config_.source_path.parent_path();
  std::vector<Input> inputs;
  for (const auto& f : input_files) {
    auto rel = fs::absolute(f).lexically_relative(fs::absolute(base.empty() ? "." : base));
    const std::string label = rel.empty() ? f.string() : rel.generic_string();
    inputs.push_back({label, sha256_file(f)});
  }

  const auto dir = city_dir(city);
  const auto stamp_path = dir / kStampDir / (stage + ".json");
  json expected;
  expected["stage"] = stage;
  expected["version"] = kToolVersion;
  expected["config_sha256"] = config_hash_;
  expected["discover"] = stage == "enrich" && discover_;
  json ins = json::array();
  for (const auto& in : inputs) ins.push_back({in.label, in.sha256});
  expected["inputs"] = ins;

  StageResult result{stage, city.city.city_id, false, {}};
  if (fs::exists(stamp_path)) {
    try {
      const auto stamp = json::parse(read_file(stamp_path));
      bool fresh = true;
      for (const char* key : {"stage", "version", "config_sha256", "discover", "inputs"}) {
        if (stamp.value(key, json()) != expected[key]) fresh = false;
      }
      std::vector<fs::path> outputs;
      if (fresh) {
        for (const auto& o : stamp.at("outputs")) {
          const auto p = dir / o.at(0).get<std::string>();
          if (!fs::exists(p) || sha256_file(p) != o.at(1).get<std::string>()) {
            fresh = false;
            break;
          }
          outputs.push_back(p);
        }
      }
      if (fresh) {
        log_ << "[" << city.city.city_id << "] " << stage << ": up to date\n";
        result.skipped = true;
        result.outputs = std::move(outputs);
        return result;
      }
    } catch (const nlohmann::json::exception&) {
      // unreadable stamp: recompute
    }
  }

  result.outputs = (this->*body)(city, inputs);
  json outs = json::array();
  for (const auto& p : result.outputs) {
    outs.push_back({p.lexically_relative(dir).generic_string(), sha256_file(p)});
  }
  expected["outputs"] = outs;
  fs::create_directories(stamp_path.parent_path());
  write_file_atomic(stamp_path, expected.dump(2) + "\n");
  log_ << "[" << city.city.city_id << "] " << stage << ": wrote " << result.outputs.size()
       << " file(s)\n";
  return result;
}

// ---------------------------------------------------------------- ingest

std::vector<StageResult> Pipeline::ingest() {
  std::vector<StageResult> out;
  for (const auto& c : config_.cities) {
    if (!c.dataset) throw UsageError("city '" + c.city.city_id + "' has no dataset configured");
    std::vector<fs::path> inputs{*c.dataset};
    if (c.osm_roads) inputs.push_back(*c.osm_roads);
    out.push_back(run_stage(c, "ingest", inputs, &Pipeline::do_ingest));
  }
  return out;
}

std::vector<fs::path> Pipeline::do_ingest(const CitySettings& c, const std::vector<Input>& inputs) {
  const auto dir = city_dir(c);
  fs::create_directories(dir);
  const auto& id = c.city.city_id;
  auto dataset = parse_curated_dataset(*c.dataset, c.city);
  if (dataset.records.empty()) warn(id, "dataset has no usable records");

  std::ostringstream records;
  records << csv_header("ingest", id, inputs);
  write_curated_dataset(records, dataset.records);
  write_file_atomic(dir / "records.csv", records.str());

  auto report_json = [&](const IngestReport& r) {
    json j;
    j["metadata"] = json::parse(json_metadata("ingest", id, inputs));
    j["rows_read"] = r.rows_read;
    j["rows_kept"] = r.rows_kept;
    j["rows_dropped"] = r.rows_dropped();
    j["rows_dropped_by_reason"] = r.rows_dropped_by_reason;
    j["warnings"] = r.warnings;
    return j;
  };
  json report = report_json(dataset.report);
  std::vector<fs::path> written{dir / "records.csv", dir / "ingest_report.json"};

  if (c.osm_roads) {
    auto roads = parse_osm_roads(*c.osm_roads, config_.road_exclusions);
    std::ostringstream tsv;
    std::istringstream header(csv_header("ingest", id, inputs));
    for (std::string line; std::getline(header, line);) tsv << line << "\n";
    write_osm_roads(tsv, roads.segments);
    write_file_atomic(dir / "roads.tsv", tsv.str());
    auto roads_json = report_json(roads.report);
    roads_json.erase("metadata");
    report["roads"] = roads_json;
    written.push_back(dir / "roads.tsv");
  }
  write_file_atomic(dir / "ingest_report.json", report.dump(2) + "\n");
  for (const auto& [reason, n] : dataset.report.rows_dropped_by_reason) {
    log_ << "[" << id << "] dropped " << n << " row(s): " << reason << "\n";
  }
  return written;
}

// ---------------------------------------------------------------- enrich

std::vector<StageResult> Pipeline::enrich(bool discover) {
  discover_ = discover;
  std::vector<StageResult> out;
  for (const auto& c : config_.cities) {
    std::vector<fs::path> inputs{require(c, "records.csv", "ingest")};
    if (config_.lexicon) inputs.push_back(*config_.lexicon);
    if (config_.transliteration) inputs.push_back(*config_.transliteration);
    if (config_.decisions && fs::exists(*config_.decisions)) inputs.push_back(*config_.decisions);
    out.push_back(run_stage(c, "enrich", inputs, &Pipeline::do_enrich));
  }
  return out;
}

std::vector<fs::path> Pipeline::do_enrich(const CitySettings& c, const std::vector<Input>& inputs) {
  const auto dir = city_dir(c);
  const auto& id = c.city.city_id;
  auto records = parse_curated_dataset(dir / "records.csv", c.city).records;

  const OccupationLexicon lexicon =
      config_.lexicon ? OccupationLexicon::load(*config_.lexicon) : OccupationLexicon();
  auto cache = config_.cache ? std::make_unique<EnrichmentCache>(*config_.cache)
                             : std::make_unique<EnrichmentCache>();
  Disambiguation decisions = load_decisions(config_.decisions);

  const bool lookups =
      discover_ || std::any_of(records.begin(), records.end(), [](const auto& r) { return needs_lookup(r); });

  std::optional<ResponseArchive> archive;
  if (config_.archive) archive.emplace(*config_.archive);
  std::unique_ptr<Transport> http, retry, wrapper;
  Transport* transport = transport_override_;
  if (!transport && lookups) {
    if (config_.offline) {
      wrapper = std::make_unique<ReplayTransport>(*archive);
      transport = wrapper.get();
    } else {
      http = std::make_unique<HttpClientTransport>();
      retry = std::make_unique<RetryingTransport>(*http, RetryPolicy{});
      transport = retry.get();
      if (archive) {
        wrapper = std::make_unique<RecordingTransport>(*retry, *archive);
        transport = wrapper.get();
      }
    }
  }
  RateLimiter limiter(config_.rate_limit);
  std::optional<KnowledgeBaseClient> client;
  if (transport) {
    client.emplace(*transport, config_.endpoint, &limiter);
    client->set_language(c.city.language);
  }

  EnrichOptions options{config_.parallelism, &decisions};
  auto outcome = enrich_records(records, client ? &*client : nullptr, *cache, lexicon, options);

  if (!outcome.ambiguous.empty() && prompt_in_ && config_.prompt && client) {
    bool changed = false;
    for (const auto& amb : outcome.ambiguous) {
      log_ << "[" << id << "] '" << amb.name << "' matches several people:\n";
      for (std::size_t i = 0; i < amb.candidates.size(); ++i) {
        const auto& cand = amb.candidates[i];
        log_ << "  " << (i + 1) << ") " << cand.label << " (" << cand.entity_id;
        if (cand.birth_year) log_ << ", born " << *cand.birth_year;
        log_ << ")\n";
      }
      log_ << "  choice [1-" << amb.candidates.size() << ", blank to skip]: " << std::flush;
      std::string line;
      if (!std::getline(*prompt_in_, line)) break;
      std::size_t pick = 0;
      try {
        pick = std::stoul(std::string(text::trim(line)));
      } catch (const std::exception&) {
        continue;
      }
      if (pick >= 1 && pick <= amb.candidates.size()) {
        decisions[text::fold_key(amb.name)] = amb.candidates[pick - 1].entity_id;
        changed = true;
      }
    }
    if (changed) {
      if (config_.decisions) {
        std::ostringstream ss;
        csv::write_row(ss, {"honoree_name", "entity_id"});
        for (const auto& [key, entity] : decisions) csv::write_row(ss, {key, entity});
        write_file_atomic(*config_.decisions, ss.str());
      }
      outcome = enrich_records(records, &*client, *cache, lexicon, options);
    }
  }

  for (const auto& amb : outcome.ambiguous) {
    warn(id, "ambiguous honoree '" + amb.name + "' left unresolved (see ambiguous.csv)");
  }

  std::vector<fs::path> written;
  {
    std::ostringstream ss;
    ss << csv_header("enrich", id, inputs);
    write_curated_dataset(ss, outcome.records);
    write_file_atomic(dir / "enriched.csv", ss.str());
    written.push_back(dir / "enriched.csv");
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& amb : outcome.ambiguous) {
      for (const auto& cand : amb.candidates) {
        rows.push_back({amb.name, cand.entity_id, cand.label, year_text(cand.birth_year)});
      }
    }
    write_file_atomic(dir / "ambiguous.csv",
                      rows_to_string(csv_header("enrich", id, inputs), rows,
                                     {"honoree_name", "entity_id", "label", "birth_year"}));
    written.push_back(dir / "ambiguous.csv");
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [label, n] : outcome.unmatched_occupations) rows.push_back({label, std::to_string(n)});
    write_file_atomic(dir / "unmatched_occupations.csv",
                      rows_to_string(csv_header("enrich", id, inputs), rows, {"occupation_raw", "count"}));
    written.push_back(dir / "unmatched_occupations.csv");
  }
  if (c.transliterate) {
    const auto table = config_.transliteration ? TransliterationTable::load(*config_.transliteration)
                                               : TransliterationTable::german_default();
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : outcome.records) {
      const std::string honoree = r.honoree ? r.honoree->full_name : std::string();
      rows.push_back({r.street_name, transliterate_name(r.street_name, table), honoree,
                      transliterate_name(honoree, table)});
    }
    write_file_atomic(dir / "transliterations.csv",
                      rows_to_string(csv_header("enrich", id, inputs), rows,
                                     {"street_name", "street_name_en", "honoree_name", "honoree_name_en"}));
    written.push_back(dir / "transliterations.csv");
  }
  if (discover_) {
    if (c.city.kb_area.empty()) {
      warn(id, "no kb_area configured; skipping named-after discovery");
    } else {
      std::vector<std::vector<std::string>> rows;
      for (const auto& n : client->query_named_after(c.city)) {
        rows.push_back({n.street_entity_id, n.street_name, n.eponym.entity_id, n.eponym.label,
                        n.eponym.is_person ? "true" : "false", format_value(n.eponym.confidence)});
      }
      std::sort(rows.begin(), rows.end());
      write_file_atomic(dir / "named_after.csv",
                        rows_to_string(csv_header("enrich", id, inputs), rows,
                                       {"street_entity_id", "street_name", "eponym_entity_id",
                                        "eponym_label", "is_person", "confidence"}));
      written.push_back(dir / "named_after.csv");
    }
  }

  json report;
  report["metadata"] = json::parse(json_metadata("enrich", id, inputs));
  report["records"] = outcome.records.size();
  report["complete_records"] = outcome.complete;
  report["names_looked_up"] = outcome.looked_up;
  report["cache_hits"] = outcome.cache_hits;
  report["ambiguous"] = outcome.ambiguous.size();
  std::size_t unmatched = 0;
  for (const auto& [label, n] : outcome.unmatched_occupations) unmatched += n;
  report["unmatched_occupation_labels"] = unmatched;
  write_file_atomic(dir / "enrich_report.json", report.dump(2) + "\n");
  written.push_back(dir / "enrich_report.json");
  return written;
}

// ---------------------------------------------------------------- metrics

std::vector<StageResult> Pipeline::metrics() {
  std::vector<StageResult> out;
  for (const auto& c : config_.cities) {
    std::vector<fs::path> inputs{require(c, "enriched.csv", "enrich")};
    if (c.districts) inputs.push_back(*c.districts);
    out.push_back(run_stage(c, "metrics", inputs, &Pipeline::do_metrics));
  }
  return out;
}

std::vector<fs::path> Pipeline::do_metrics(const CitySettings& c, const std::vector<Input>& inputs) {
  const auto dir = city_dir(c) / "metrics";
  fs::create_directories(dir);
  const auto& id = c.city.city_id;
  const auto a = analyse(c, city_dir(c) / "enriched.csv", config_);
  if (a.records.empty()) warn(id, "no records; metric files are empty");
  const auto header = csv_header("metrics", id, inputs);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& body) {
    write_file_atomic(dir / name, body);
    written.push_back(dir / name);
  };

  if (config_.metric_enabled("denominations")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [d, v] : a.denominations.values) rows.push_back({std::to_string(d), format_value(v.value_or(0))});
    emit("denominations.csv", rows_to_string(header, rows, {"decade", "fraction"}));
  }
  if (config_.metric_enabled("fhd")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [d, v] : a.fhd.series.values) rows.push_back({std::to_string(d), format_value(v.value_or(0))});
    emit("fhd.csv", rows_to_string(header, rows, {"decade", "honorees"}));
    if (a.fhd.excluded_incomplete) {
      warn(id, std::to_string(a.fhd.excluded_incomplete) + " honoree(s) without birth or death year left out of fhd");
    }
    if (a.fhd.skipped_inverted) {
      warn(id, std::to_string(a.fhd.skipped_inverted) + " honoree(s) born after their death year left out of fhd");
    }
  }
  if (config_.metric_enabled("f_prop")) {
    emit("f_prop_by_decade.csv",
         rows_to_string(header, decade_rows(a.f_decades), {"decade", "female", "streets", "value"}));
    emit("f_prop_by_district.csv",
         rows_to_string(header, district_rows(a.f_district), {"district_id", "female", "denominator", "value"}));
  }
  if (config_.metric_enabled("for_prop")) {
    emit("for_prop_by_decade.csv",
         rows_to_string(header, decade_rows(a.for_decades), {"decade", "foreign", "streets", "value"}));
    emit("for_prop_by_district.csv", rows_to_string(header, district_rows(a.for_district),
                                                    {"district_id", "foreign", "denominator", "value"}));
  }
  if (config_.metric_enabled("occupation_ranking")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [d, groups] : a.ranking.decades) {
      for (const auto& g : groups) {
        rows.push_back({std::to_string(d), std::to_string(g.rank), std::string(to_string(g.group)),
                        std::to_string(g.count)});
      }
    }
    emit("occupation_ranking.csv", rows_to_string(header, rows, {"decade", "rank", "group", "count"}));
  }
  if (config_.metric_enabled("stability")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : a.stability) {
      rows.push_back({std::to_string(s.start), s.mean_tau ? format_value(*s.mean_tau) : "",
                      std::to_string(s.pair_tau.size()), join_ints(s.missing_pairs), s.reason});
    }
    emit("stability.csv", rows_to_string(header, rows,
                                         {"half_century", "mean_tau", "scored_pairs", "missing_pairs", "reason"}));
  }

  json summary;
  summary["metadata"] = json::parse(json_metadata("metrics", id, inputs));
  summary["records"] = a.records.size();
  summary["records_from_start_decade"] = a.dated.size();
  summary["start_decade"] = c.city.start_decade;
  summary["formula_mode"] = config_.strict_formulae ? "literal" : "corrected";
  summary["district_normalization"] = config_.within_district ? "within_district" : "city_total";
  summary["ranking_mode"] = config_.ranking_mode == RankingMode::cumulative ? "cumulative" : "per_decade";
  auto prop = [](const Proportion& p) {
    json j{{"numerator", p.numerator}, {"denominator", p.denominator}};
    j["value"] = p.value() ? json(*p.value()) : json();
    return j;
  };
  summary["f_prop_pooled"] = prop(a.f_pooled);
  summary["for_prop_pooled"] = prop(a.for_pooled);
  if (auto peak = a.peak_f_prop()) summary["f_prop_peak"] = {{"decade", peak->first}, {"value", peak->second}};
  summary["fhd_excluded_incomplete"] = a.fhd.excluded_incomplete;
  summary["fhd_skipped_inverted"] = a.fhd.skipped_inverted;
  if (a.has_polygons) {
    summary["district_assignment"] = {{"by_name", a.assignment.by_name},
                                      {"by_point", a.assignment.by_point},
                                      {"by_overlap", a.assignment.by_overlap},
                                      {"by_boundary", a.assignment.by_boundary},
                                      {"unassigned", a.assignment.unassigned}};
  }
  json series;
  auto decade_json = [](const std::vector<std::pair<int, Proportion>>& v) {
    json j = json::object();
    for (const auto& [d, p] : v) j[std::to_string(d)] = p.value() ? json(*p.value()) : json();
    return j;
  };
  auto district_json = [](const DistrictMetric& m) {
    json j = json::object();
    for (const auto& [id, p] : m.values) j[id] = p.value() ? json(*p.value()) : json();
    return j;
  };
  auto count_json = [](const DecadeSeries& s) {
    json j = json::object();
    for (const auto& [d, v] : s.values) j[std::to_string(d)] = v.value_or(0);
    return j;
  };
  if (config_.metric_enabled("f_prop")) {
    series["f_prop"] = decade_json(a.f_decades);
    series["f_prop_by_district"] = district_json(a.f_district);
  }
  if (config_.metric_enabled("for_prop")) {
    series["for_prop"] = decade_json(a.for_decades);
    series["for_prop_by_district"] = district_json(a.for_district);
  }
  if (config_.metric_enabled("fhd")) series["fhd"] = count_json(a.fhd.series);
  if (config_.metric_enabled("denominations")) series["denominations"] = count_json(a.denominations);
  if (config_.metric_enabled("stability")) {
    json j = json::object();
    for (const auto& s : a.stability) j[std::to_string(s.start)] = s.mean_tau ? json(*s.mean_tau) : json();
    series["stability"] = j;
  }
  summary["metrics"] = series;
  emit("report.json", summary.dump(2) + "\n");
  return written;
}

// ---------------------------------------------------------------- map

std::vector<StageResult> Pipeline::map() {
  std::vector<StageResult> out;
  for (const auto& c : config_.cities) {
    if (!c.districts) {
      warn(c.city.city_id, "no district polygons configured; skipping map");
      continue;
    }
    out.push_back(run_stage(c, "map", {require(c, "enriched.csv", "enrich"), *c.districts}, &Pipeline::do_map));
  }
  return out;
}

std::vector<fs::path> Pipeline::do_map(const CitySettings& c, const std::vector<Input>& inputs) {
  const auto dir = city_dir(c) / "maps";
  fs::create_directories(dir);
  const auto a = analyse(c, city_dir(c) / "enriched.csv", config_);
  const auto meta = json_metadata("map", c.city.city_id, inputs);
  std::vector<fs::path> written;
  for (const auto* metric : {&a.f_district, &a.for_district}) {
    if (!config_.metric_enabled(metric == &a.f_district ? "f_prop" : "for_prop")) continue;
    const auto map = emit_choropleth(*metric, a.city.districts, config_.bins);
    for (const auto& w : map.warnings) warn(c.city.city_id, metric->metric_id + ": " + w);
    const auto path = dir / (metric->metric_id + ".geojson");
    write_file_atomic(path, to_geojson(map, meta) + "\n");
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------- validate

std::vector<StageResult> Pipeline::validate_sample() {
  std::vector<StageResult> out;
  for (const auto& c : config_.cities) {
    if (!c.osm_roads) {
      warn(c.city.city_id, "no osm_roads configured; skipping sample");
      continue;
    }
    std::vector<fs::path> inputs{require(c, "roads.tsv", "ingest")};
    if (c.districts) inputs.push_back(*c.districts);
    out.push_back(run_stage(c, "sample", inputs, &Pipeline::do_sample));
  }
  return out;
}

std::vector<fs::path> Pipeline::do_sample(const CitySettings& c, const std::vector<Input>& inputs) {
  const auto dir = city_dir(c) / "validation";
  fs::create_directories(dir);
  const auto& id = c.city.city_id;
  auto roads = parse_osm_roads(city_dir(c) / "roads.tsv", config_.road_exclusions).segments;
  const auto districts = load_districts(c);
  std::vector<std::string> strata;
  if (districts.empty()) {
    strata.push_back(id);
    for (auto& r : roads) r.district_id = id;
  } else {
    const DistrictIndex index(districts);
    for (const auto& d : districts) strata.push_back(d.district_id);
    for (auto& r : roads) r.district_id = assign_district(r.geometry, index).district_id;
  }
  const auto plan = make_sample_plan(id, strata, config_.sample_size, config_.seed);
  const auto sample = draw_sample(roads, plan);
  for (const auto& w : sample.warnings) warn(id, w);

  std::ostringstream ss;
  ss << csv_header("validate sample", id, inputs);
  write_annotation_template(ss, sample);
  write_file_atomic(dir / "sample.csv", ss.str());

  json j;
  j["metadata"] = json::parse(json_metadata("validate sample", id, inputs));
  j["algorithm"] = kSamplerAlgorithm;
  j["seed"] = plan.seed;
  j["sample_size"] = plan.sample_size;
  j["quotas"] = plan.strata;
  j["realized"] = sample.realized;
  j["drawn"] = sample.streets.size();
  j["warnings"] = sample.warnings;
  write_file_atomic(dir / "sample.json", j.dump(2) + "\n");
  return {dir / "sample.csv", dir / "sample.json"};
}

std::vector<StageResult> Pipeline::validate_report() {
  std::vector<StageResult> out;
  for (const auto& c : config_.cities) {
    if (!c.annotations) {
      warn(c.city.city_id, "no annotations configured; skipping coverage report");
      continue;
    }
    std::vector<fs::path> inputs{*c.annotations};
    for (const char* f : {"enriched.csv", "roads.tsv"}) {
      if (fs::exists(city_dir(c) / f)) inputs.push_back(city_dir(c) / f);
    }
    out.push_back(run_stage(c, "coverage", inputs, &Pipeline::do_report));
  }
  return out;
}

std::vector<fs::path> Pipeline::do_report(const CitySettings& c, const std::vector<Input>& inputs) {
  const auto dir = city_dir(c) / "validation";
  fs::create_directories(dir);
  const auto& id = c.city.city_id;
  auto report = estimate_coverage(parse_annotations(*c.annotations));
  const auto enriched = city_dir(c) / "enriched.csv";
  const auto roads = city_dir(c) / "roads.tsv";
  if (fs::exists(enriched) && fs::exists(roads)) {
    const auto records = parse_curated_dataset(enriched, c.city).records;
    const auto osm = parse_osm_roads(roads, config_.road_exclusions).segments;
    report.curated = compare_with_curated(records, osm.size());
  }
  auto j = json::parse(coverage_json(report, id));
  j["metadata"] = json::parse(json_metadata("validate report", id, inputs));
  write_file_atomic(dir / "coverage.json", j.dump(2) + "\n");
  write_file_atomic(dir / "coverage.txt", csv_header("validate report", id, inputs) + coverage_table(report, id));
  return {dir / "coverage.json", dir / "coverage.txt"};
}

// ---------------------------------------------------------------- reproduce

fs::path Pipeline::reproduce() {
  ingest();
  enrich();
  metrics();
  map();
  validate_report();

  const auto bundle = config_.output_dir / "bundle";
  fs::create_directories(bundle);
  std::vector<Input> inputs;
  for (const auto& c : config_.cities) {
    const auto p = city_dir(c) / "enriched.csv";
    inputs.push_back({c.city.city_id + "/enriched.csv", sha256_file(p)});
  }
  const auto header = csv_header("reproduce", "", inputs);

  std::vector<std::vector<std::string>> t1, headline, fig1, fig2, fig3, fig4, fig5, fig6, t2;
  for (const auto& c : config_.cities) {
    const auto& id = c.city.city_id;
    const auto a = analyse(c, city_dir(c) / "enriched.csv", config_);

    std::optional<Year> dmin, dmax, hmin, hmax;
    for (const auto& r : a.records) {
      if (r.denomination_year) {
        dmin = dmin ? std::min(*dmin, *r.denomination_year) : *r.denomination_year;
        dmax = dmax ? std::max(*dmax, *r.denomination_year) : *r.denomination_year;
      }
      if (r.honoree && r.honoree->birth_year) {
        hmin = hmin ? std::min(*hmin, *r.honoree->birth_year) : *r.honoree->birth_year;
      }
      if (r.honoree && r.honoree->death_year) {
        hmax = hmax ? std::max(*hmax, *r.honoree->death_year) : *r.honoree->death_year;
      }
    }
    auto range = [](std::optional<Year> lo, std::optional<Year> hi) {
      return lo && hi ? period_year(*lo) + " - " + period_year(*hi) : std::string();
    };
    t1.push_back({id, std::to_string(a.records.size()), range(dmin, dmax), range(hmin, hmax), year_text(dmin),
                  year_text(dmax), year_text(hmin), year_text(hmax)});

    const auto peak = a.peak_f_prop();
    headline.push_back({id, value_text(a.for_pooled), value_text(a.f_pooled),
                        peak ? format_value(peak->second) : "", peak ? std::to_string(peak->first) : ""});
    for (const auto& [d, v] : a.denominations.values) fig1.push_back({id, std::to_string(d), format_value(v.value_or(0))});
    for (const auto& [d, v] : a.fhd.series.values) fig2.push_back({id, std::to_string(d), format_value(v.value_or(0))});
    for (const auto* series : {&a.f_decades, &a.for_decades}) {
      const std::string metric = series == &a.f_decades ? "f_prop" : "for_prop";
      for (const auto& [d, p] : *series) {
        fig3.push_back({id, metric, std::to_string(d), std::to_string(p.numerator), std::to_string(p.denominator),
                        value_text(p)});
      }
    }
    for (const auto* m : {&a.f_district, &a.for_district}) {
      for (const auto& [district, p] : m->values) {
        fig4.push_back({id, m->metric_id, district, std::to_string(p.numerator), std::to_string(p.denominator),
                        value_text(p)});
      }
    }
    for (const auto& [d, groups] : a.ranking.decades) {
      for (const auto& g : groups) {
        fig5.push_back({id, std::to_string(d), std::to_string(g.rank), std::string(to_string(g.group)),
                        std::to_string(g.count)});
      }
    }
    for (const auto& s : a.stability) {
      fig6.push_back({id, std::to_string(s.start), s.mean_tau ? format_value(*s.mean_tau) : "", s.reason});
    }
    const auto coverage = city_dir(c) / "validation" / "coverage.json";
    if (c.annotations && fs::exists(coverage)) {
      auto report = estimate_coverage(parse_annotations(*c.annotations));
      std::vector<std::string> row{id, std::to_string(report.sampled), std::to_string(report.honorific.numerator),
                                   value_text(report.honorific),
                                   std::to_string(report.female_among_honorific.numerator),
                                   value_text(report.female_among_honorific)};
      const auto roads = city_dir(c) / "roads.tsv";
      if (fs::exists(roads)) {
        const auto cmp = compare_with_curated(
            a.records, parse_osm_roads(roads, config_.road_exclusions).segments.size());
        row.push_back(value_text(cmp.people_share));
        row.push_back(value_text(cmp.female_share));
      } else {
        row.insert(row.end(), {"", ""});
      }
      t2.push_back(row);
    }
  }

  auto emit = [&](const std::string& name, const std::vector<std::vector<std::string>>& rows,
                  std::initializer_list<std::string_view> cols) {
    write_file_atomic(bundle / name, rows_to_string(header, rows, cols));
  };
  emit("table1.csv", t1,
       {"city", "honorific_streets", "denomination_period", "historical_period_honorees", "denomination_min",
        "denomination_max", "historical_min", "historical_max"});
  emit("headline.csv", headline, {"city", "for_prop_pooled", "f_prop_pooled", "f_prop_peak", "f_prop_peak_decade"});
  emit("fig1_denominations.csv", fig1, {"city", "decade", "fraction"});
  emit("fig2_fhd.csv", fig2, {"city", "decade", "honorees"});
  emit("fig3_proportions.csv", fig3, {"city", "metric", "decade", "numerator", "denominator", "value"});
  emit("fig4_districts.csv", fig4, {"city", "metric", "district_id", "numerator", "denominator", "value"});
  emit("fig5_occupations.csv", fig5, {"city", "decade", "rank", "group", "count"});
  emit("fig6_stability.csv", fig6, {"city", "half_century", "mean_tau", "reason"});
  emit("table2_validation.csv", t2,
       {"city", "sampled", "honorific", "honorific_share", "female", "female_share", "curated_people_share",
        "curated_female_share"});

  // Manifest over the bundle and every per-city artifact (stamps excluded).
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<fs::path> roots{bundle};
  for (const auto& c : config_.cities) roots.push_back(city_dir(c));
  for (const auto& root : roots) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      const auto rel = e.path().lexically_relative(config_.output_dir).generic_string();
      if (rel.find(std::string(kStampDir)) != std::string::npos || rel == "bundle/MANIFEST.sha256") continue;
      entries.emplace_back(rel, sha256_file(e.path()));
    }
  }
  std::sort(entries.begin(), entries.end());
  std::ostringstream manifest;
  for (const auto& [rel, hash] : entries) manifest << hash << "  " << rel << "\n";
  write_file_atomic(bundle / "MANIFEST.sha256", manifest.str());
  log_ << "bundle: " << bundle.string() << " (" << entries.size() << " files)\n";
  return bundle;
}

}  // namespace streetonomics
