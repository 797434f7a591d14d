#include "streetonomics/validate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "streetonomics/csv.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/spatial.hpp"
#include "streetonomics/text.hpp"

namespace streetonomics {

namespace {

std::optional<bool> parse_flag(std::string_view s, bool& ok) {
  ok = true;
  const auto v = text::to_lower_ascii(text::trim(s));
  if (v.empty()) return std::nullopt;
  if (v == "true" || v == "yes" || v == "y" || v == "1") return true;
  if (v == "false" || v == "no" || v == "n" || v == "0") return false;
  ok = false;
  return std::nullopt;
}

nlohmann::ordered_json proportion_json(const Proportion& p) {
  nlohmann::ordered_json j;
  j["numerator"] = p.numerator;
  j["denominator"] = p.denominator;
  if (auto v = p.value()) j["value"] = format_value(*v); else j["value"] = nullptr;
  return j;
}

nlohmann::ordered_json interval_json(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return {{"low", format_value(i->low)}, {"high", format_value(i->high)}};
}

std::string percent(const Proportion& p) {
  auto v = p.value();
  if (!v) return "n/a";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(1) << 100.0 * *v << "%";
  return ss.str();
}

std::string percent_interval(const std::optional<Interval>& i) {
  if (!i) return "";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(1) << " [" << 100.0 * i->low << ", " << 100.0 * i->high << "]";
  return ss.str();
}

}  // namespace

SamplePlan make_sample_plan(std::string city_id, std::span<const std::string> districts,
                            std::size_t sample_size, std::uint64_t seed) {
  SamplePlan plan;
  plan.city_id = std::move(city_id);
  plan.sample_size = sample_size;
  plan.seed = seed;
  std::set<std::string> ids(districts.begin(), districts.end());
  if (ids.empty()) return plan;
  const std::size_t base = sample_size / ids.size();
  std::size_t remainder = sample_size % ids.size();
  for (const auto& id : ids) {
    plan.strata[id] = base + (remainder > 0 ? 1 : 0);
    if (remainder > 0) --remainder;
  }
  return plan;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

Sample draw_sample(std::span<const RoadSegment> roads, const SamplePlan& plan) {
  Sample sample;

  // Canonical population: one entry per folded name, smallest (district, name) wins.
  std::map<std::string, SampledStreet> by_key;
  for (const auto& r : roads) {
    if (!r.name || !r.district_id || !plan.strata.contains(*r.district_id)) continue;
    SampledStreet s{*r.name, *r.district_id};
    auto key = text::fold_key(*r.name);
    auto [it, inserted] = by_key.emplace(std::move(key), s);
    if (!inserted && std::tie(s.district_id, s.street_name) < std::tie(it->second.district_id, it->second.street_name)) {
      it->second = s;
    }
  }
  std::map<std::string, std::vector<std::string>> pools;
  for (const auto& [id, _] : plan.strata) pools[id];
  for (const auto& [_, s] : by_key) pools[s.district_id].push_back(s.street_name);
  for (auto& [_, names] : pools) std::sort(names.begin(), names.end());

  std::map<std::string, std::size_t> final_quota;
  std::size_t shortfall = 0;
  for (const auto& [id, quota] : plan.strata) {
    const std::size_t available = pools[id].size();
    final_quota[id] = std::min(quota, available);
    shortfall += quota - final_quota[id];
  }
  while (shortfall > 0) {
    bool progressed = false;
    for (auto& [id, q] : final_quota) {
      if (shortfall == 0) break;
      if (q < pools[id].size()) {
        ++q;
        --shortfall;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  if (shortfall > 0) {
    sample.warnings.push_back("population of " + std::to_string(by_key.size()) +
                              " streets is smaller than the requested sample of " +
                              std::to_string(plan.sample_size) + "; returning all of them");
  }

  std::mt19937_64 rng(plan.seed);
  for (auto& [id, names] : pools) {
    const std::size_t take = final_quota[id];
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, names.size() - i));
      std::swap(names[i], names[j]);
      sample.streets.push_back({names[i], id});
    }
    sample.realized[id] = take;
  }
  std::sort(sample.streets.begin(), sample.streets.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.district_id, a.street_name) < std::tie(b.district_id, b.street_name);
            });
  return sample;
}

std::vector<Annotation> parse_annotations(std::istream& in) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw DataError("annotation file is empty");
  const csv::Header header(std::move(*header_row));
  const std::string_view required[] = {"street_name", "district", "is_honorific", "honoree_gender"};
  if (auto missing = header.first_missing(required)) {
    throw DataError("annotation file: missing column '" + *missing + "'");
  }
  const auto c_name = *header.find("street_name"), c_district = *header.find("district"),
             c_flag = *header.find("is_honorific"), c_gender = *header.find("honoree_gender");

  std::vector<Annotation> out;
  while (auto row = reader.next()) {
    if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
    const auto where = "annotation line " + std::to_string(reader.line());
    if (row->size() != header.names().size()) throw DataError(where + ": wrong field count");
    Annotation a;
    a.street_name = std::string(text::trim((*row)[c_name]));
    a.district = std::string(text::trim((*row)[c_district]));
    bool ok = true;
    a.is_honorific = parse_flag((*row)[c_flag], ok);
    if (!ok) throw DataError(where + ": is_honorific must be true/false, got '" + (*row)[c_flag] + "'");
    const auto g = parse_gender((*row)[c_gender]);
    if (!g) throw DataError(where + ": unknown gender '" + (*row)[c_gender] + "'");
    a.honoree_gender = *g;
    if (a.honoree_gender != Gender::unknown && a.is_honorific != true) {
      throw DataError(where + ": gender given for a street not marked honorific");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Annotation> parse_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotation file " + path.string());
  try {
    return parse_annotations(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_annotation_template(std::ostream& out, const Sample& sample) {
  csv::write_row(out, {"street_name", "district", "is_honorific", "honoree_gender"});
  for (const auto& s : sample.streets) csv::write_row(out, {s.street_name, s.district_id, "", ""});
}

std::optional<Interval> wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return std::nullopt;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return Interval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

CoverageReport estimate_coverage(std::span<const Annotation> annotations) {
  std::vector<std::string> missing;
  for (const auto& a : annotations) {
    if (!a.is_honorific) missing.push_back(a.street_name + (a.district.empty() ? "" : " (" + a.district + ")"));
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " unannotated row(s):";
    for (const auto& m : missing) msg += "\n  " + m;
    throw DataError(msg);
  }
  CoverageReport r;
  r.sampled = annotations.size();
  r.honorific.denominator = static_cast<std::int64_t>(annotations.size());
  for (const auto& a : annotations) {
    if (!*a.is_honorific) continue;
    ++r.honorific.numerator;
    ++r.female_among_honorific.denominator;
    if (a.honoree_gender == Gender::female) ++r.female_among_honorific.numerator;
  }
  r.honorific_ci = wilson_interval(r.honorific.numerator, r.honorific.denominator);
  r.female_ci = wilson_interval(r.female_among_honorific.numerator, r.female_among_honorific.denominator);
  return r;
}

CuratedComparison compare_with_curated(std::span<const StreetRecord> curated, std::size_t osm_total) {
  CuratedComparison c;
  c.osm_total = osm_total;
  c.curated_honorific = curated.size();
  c.people_share = {static_cast<std::int64_t>(curated.size()), static_cast<std::int64_t>(osm_total)};
  c.female_share = f_prop_pooled(curated);
  return c;
}

std::string coverage_json(const CoverageReport& report, std::string_view city_id) {
  nlohmann::ordered_json j;
  j["city_id"] = city_id;
  j["sampled"] = report.sampled;
  j["honorific"] = proportion_json(report.honorific);
  j["honorific_wilson95"] = interval_json(report.honorific_ci);
  j["female_among_honorific"] = proportion_json(report.female_among_honorific);
  j["female_among_honorific_wilson95"] = interval_json(report.female_ci);
  j["interval_note"] = "Wilson 95% score intervals are an extension beyond the point estimates";
  if (report.curated) {
    const auto& c = *report.curated;
    nlohmann::ordered_json cj;
    cj["osm_total"] = c.osm_total;
    cj["curated_honorific"] = c.curated_honorific;
    cj["people_share"] = proportion_json(c.people_share);
    cj["people_share_formula"] = "curated honorific streets / OSM named streets after filtering";
    cj["female_share"] = proportion_json(c.female_share);
    cj["female_share_formula"] = "female honorees / gender-resolved curated streets";
    j["curated"] = std::move(cj);
  }
  return j.dump(2) + "\n";
}

std::string coverage_table(const CoverageReport& report, std::string_view city_id) {
  std::ostringstream ss;
  ss << "city: " << city_id << "\n";
  ss << "sampled streets:                 " << report.sampled << "\n";
  ss << "honorific (sample):              " << percent(report.honorific)
     << percent_interval(report.honorific_ci) << "  (" << report.honorific.numerator << "/"
     << report.honorific.denominator << ")\n";
  ss << "female among honorific (sample): " << percent(report.female_among_honorific)
     << percent_interval(report.female_ci) << "  (" << report.female_among_honorific.numerator << "/"
     << report.female_among_honorific.denominator << ")\n";
  if (report.curated) {
    const auto& c = *report.curated;
    ss << "total streets (OSM):             " << c.osm_total << "\n";
    ss << "people (curated / OSM):          " << percent(c.people_share) << "\n";
    ss << "female (curated):                " << percent(c.female_share) << "\n";
  }
  return ss.str();
}

}  // namespace streetonomics
