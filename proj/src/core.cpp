#include "streetonomics/core.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "streetonomics/error.hpp"
#include "streetonomics/text.hpp"

namespace streetonomics {

namespace {

struct GroupNames {
  OccupationGroup group;
  std::string_view id;
  std::string_view label;
};

constexpr std::array<GroupNames, kOccupationGroupCount> kGroupNames = {{
    {OccupationGroup::creative_performing_artists, "creative_performing_artists", "creative and performing artists"},
    {OccupationGroup::authors_journalists_linguists, "authors_journalists_linguists", "authors, journalists and linguists"},
    {OccupationGroup::science_engineering, "science_engineering", "science and engineering professionals"},
    {OccupationGroup::legal_social_cultural, "legal_social_cultural", "legal, social and cultural professionals"},
    {OccupationGroup::craft_trades, "craft_trades", "craft and related trades workers"},
    {OccupationGroup::business_administration, "business_administration", "business and administration professionals"},
    {OccupationGroup::legislators, "legislators", "legislators"},
    {OccupationGroup::armed_forces_officers, "armed_forces_officers", "commissioned armed forces officers"},
    {OccupationGroup::religious, "religious", "religious"},
    {OccupationGroup::health_associate, "health_associate", "health associate professionals"},
    {OccupationGroup::teaching, "teaching", "teaching professionals"},
    {OccupationGroup::other, "other", "other"},
}};

// Historical polities and common English names. Keys are fold_key() forms.
const std::map<std::string, std::string, std::less<>>& country_aliases() {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"austria", "AT"},          {"austria hungary", "AT"},   {"austrian empire", "AT"},
      {"habsburg monarchy", "AT"}, {"archduchy of austria", "AT"},
      {"holy roman empire", "DE"}, {"germany", "DE"},           {"prussia", "DE"},
      {"kingdom of prussia", "DE"}, {"german empire", "DE"},    {"nazi germany", "DE"},
      {"west germany", "DE"},      {"east germany", "DE"},      {"german democratic republic", "DE"},
      {"kingdom of bavaria", "DE"}, {"bavaria", "DE"},          {"saxony", "DE"},
      {"kingdom of saxony", "DE"}, {"wurttemberg", "DE"},
      {"france", "FR"},            {"kingdom of france", "FR"}, {"french empire", "FR"},
      {"first french empire", "FR"}, {"second french empire", "FR"},
      {"french third republic", "FR"}, {"gaul", "FR"},
      {"united kingdom", "GB"},    {"uk", "GB"},                {"great britain", "GB"},
      {"kingdom of great britain", "GB"}, {"kingdom of england", "GB"}, {"england", "GB"},
      {"scotland", "GB"},          {"kingdom of scotland", "GB"}, {"wales", "GB"},
      {"northern ireland", "GB"},  {"united kingdom of great britain and ireland", "GB"},
      {"united states", "US"},     {"united states of america", "US"}, {"usa", "US"},
      {"us", "US"},                {"america", "US"},
      {"ireland", "IE"},           {"irish free state", "IE"},
      {"italy", "IT"},             {"kingdom of italy", "IT"},  {"papal states", "IT"},
      {"republic of venice", "IT"}, {"kingdom of sardinia", "IT"}, {"ancient rome", "IT"},
      {"roman empire", "IT"},      {"roman republic", "IT"},
      {"spain", "ES"},             {"kingdom of spain", "ES"},
      {"portugal", "PT"},          {"kingdom of portugal", "PT"},
      {"belgium", "BE"},           {"netherlands", "NL"},       {"dutch republic", "NL"},
      {"kingdom of the netherlands", "NL"}, {"luxembourg", "LU"},
      {"switzerland", "CH"},       {"old swiss confederacy", "CH"},
      {"hungary", "HU"},           {"kingdom of hungary", "HU"},
      {"czech republic", "CZ"},    {"czechia", "CZ"},           {"bohemia", "CZ"},
      {"kingdom of bohemia", "CZ"}, {"czechoslovakia", "CZ"},   {"moravia", "CZ"},
      {"slovakia", "SK"},          {"poland", "PL"},            {"kingdom of poland", "PL"},
      {"polish lithuanian commonwealth", "PL"},
      {"russia", "RU"},            {"russian empire", "RU"},    {"soviet union", "RU"},
      {"ussr", "RU"},              {"tsardom of russia", "RU"},
      {"ukraine", "UA"},           {"croatia", "HR"},           {"slovenia", "SI"},
      {"serbia", "RS"},            {"kingdom of serbia", "RS"}, {"yugoslavia", "RS"},
      {"bosnia and herzegovina", "BA"}, {"romania", "RO"},      {"bulgaria", "BG"},
      {"greece", "GR"},            {"ancient greece", "GR"},    {"turkey", "TR"},
      {"ottoman empire", "TR"},    {"denmark", "DK"},           {"sweden", "SE"},
      {"norway", "NO"},            {"finland", "FI"},           {"iceland", "IS"},
      {"israel", "IL"},            {"egypt", "EG"},             {"india", "IN"},
      {"china", "CN"},             {"japan", "JP"},             {"canada", "CA"},
      {"mexico", "MX"},            {"brazil", "BR"},            {"argentina", "AR"},
      {"chile", "CL"},             {"cuba", "CU"},              {"haiti", "HT"},
      {"puerto rico", "PR"},       {"dominican republic", "DO"}, {"jamaica", "JM"},
      {"south africa", "ZA"},      {"australia", "AU"},         {"new zealand", "NZ"},
      {"algeria", "DZ"},           {"morocco", "MA"},           {"tunisia", "TN"},
      {"senegal", "SN"},           {"lebanon", "LB"},           {"armenia", "AM"},
      {"georgia", "GE"},           {"lithuania", "LT"},         {"latvia", "LV"},
      {"estonia", "EE"},           {"venezuela", "VE"},         {"colombia", "CO"},
      {"peru", "PE"},              {"vietnam", "VN"},           {"korea", "KR"},
      {"south korea", "KR"},       {"philippines", "PH"},       {"iran", "IR"},
      {"persia", "IR"},            {"monaco", "MC"},            {"liechtenstein", "LI"},
      {"malta", "MT"},             {"cyprus", "CY"},            {"albania", "AL"},
      {"ghana", "GH"},             {"nigeria", "NG"},           {"kenya", "KE"},
      {"ethiopia", "ET"},          {"trinidad and tobago", "TT"}, {"barbados", "BB"},
      {"guyana", "GY"},            {"bangladesh", "BD"},        {"pakistan", "PK"},
      {"sri lanka", "LK"},         {"ceylon", "LK"},            {"burma", "MM"},
      {"myanmar", "MM"},           {"indonesia", "ID"},         {"thailand", "TH"},
  };
  return aliases;
}

}  // namespace

Decade Decade::from_start(int start_year) {
  if (decade_of(start_year).start_year() != start_year) {
    throw DataError("not a decade boundary: " + std::to_string(start_year));
  }
  return decade_of(start_year);
}

std::string_view to_string(Gender g) noexcept {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::unknown: break;
  }
  return "unknown";
}

std::string_view to_string(OccupationGroup g) noexcept {
  return kGroupNames[static_cast<std::size_t>(g)].id;
}

std::string_view display_label(OccupationGroup g) noexcept {
  return kGroupNames[static_cast<std::size_t>(g)].label;
}

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::gender: return "gender";
    case Metric::foreigner: return "foreigner";
    case Metric::fhd: return "fhd";
    case Metric::occupation: return "occupation";
  }
  return "?";
}

std::optional<Gender> parse_gender(std::string_view text) {
  const auto v = text::to_lower_ascii(text::trim(text));
  if (v.empty() || v == "unknown" || v == "u") return Gender::unknown;
  if (v == "female" || v == "f") return Gender::female;
  if (v == "male" || v == "m") return Gender::male;
  return std::nullopt;
}

std::optional<OccupationGroup> parse_occupation_group(std::string_view identifier) {
  const auto v = text::to_lower_ascii(text::trim(identifier));
  for (const auto& g : kGroupNames) {
    if (v == g.id) return g.group;
  }
  return std::nullopt;
}

std::optional<CountryCode> normalize_country(std::string_view raw) {
  const auto t = text::trim(raw);
  if (t.size() == 2 && std::isalpha(static_cast<unsigned char>(t[0])) &&
      std::isalpha(static_cast<unsigned char>(t[1]))) {
    std::string code(t);
    for (char& c : code) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (code == "UK") code = "GB";
    return CountryCode{code};
  }
  const auto key = text::fold_key(t);
  if (key.empty()) return std::nullopt;
  const auto& aliases = country_aliases();
  if (auto it = aliases.find(key); it != aliases.end()) return CountryCode{it->second};
  if (key.starts_with("the ")) {
    if (auto it = aliases.find(key.substr(4)); it != aliases.end()) return CountryCode{it->second};
  }
  return std::nullopt;
}

bool is_countable(const StreetRecord& record, Metric metric) noexcept {
  if (!record.honoree || record.honoree->gender == Gender::unknown) return false;
  const Honoree& h = *record.honoree;
  switch (metric) {
    case Metric::gender: return true;
    case Metric::foreigner: return h.country_of_origin.has_value();
    case Metric::fhd: return h.birth_year.has_value() && h.death_year.has_value();
    case Metric::occupation: return h.occupation_group.has_value();
  }
  return false;
}

void check_invariants(const Honoree& honoree) {
  if (honoree.birth_year && honoree.death_year && *honoree.birth_year > *honoree.death_year) {
    throw DataError("honoree '" + honoree.full_name + "' born after death (" +
                    std::to_string(*honoree.birth_year) + " > " +
                    std::to_string(*honoree.death_year) + ")");
  }
}

void check_invariants(const StreetRecord& record) {
  if (record.street_name.empty()) throw DataError("street record without a name");
  if (record.denomination_year && (*record.denomination_year < kMinDenominationYear ||
                                   *record.denomination_year > kMaxDenominationYear)) {
    throw DataError("denomination year " + std::to_string(*record.denomination_year) +
                    " of '" + record.street_name + "' outside " +
                    std::to_string(kMinDenominationYear) + ".." +
                    std::to_string(kMaxDenominationYear));
  }
  if (record.honoree) check_invariants(*record.honoree);
}

}  // namespace streetonomics
