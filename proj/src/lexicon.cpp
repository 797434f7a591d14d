#include "streetonomics/lexicon.hpp"

#include <cctype>
#include <fstream>

#include "streetonomics/csv.hpp"
#include "streetonomics/error.hpp"
#include "streetonomics/text.hpp"

namespace streetonomics {

namespace {

bool is_word_char(char c) {
  return c != ' ';
}

// Position of `needle` inside `hay` on word boundaries, or npos.
std::size_t find_word(std::string_view hay, std::string_view needle, std::size_t from = 0) {
  while (true) {
    const auto pos = hay.find(needle, from);
    if (pos == std::string_view::npos) return pos;
    const bool left = pos == 0 || !is_word_char(hay[pos - 1]);
    const auto end = pos + needle.size();
    const bool right = end == hay.size() || !is_word_char(hay[end]);
    if (left && right) return pos;
    from = pos + 1;
  }
}

bool is_alnum_utf8_start(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

OccupationLexicon::OccupationLexicon() {
  for (auto g : kAllOccupationGroups) {
    add(display_label(g), g);
    std::string id(to_string(g));
    add(id, g);
  }
}

void OccupationLexicon::add(std::string_view raw_label, OccupationGroup group) {
  auto key = text::fold_key(raw_label);
  if (key.empty()) return;
  entries_[std::move(key)] = group;
}

OccupationLexicon OccupationLexicon::load(std::istream& in) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw DataError("occupation lexicon is empty");
  const csv::Header header(std::move(*header_row));
  const std::string_view required[] = {"raw_label", "group"};
  if (auto missing = header.first_missing(required)) {
    throw DataError("occupation lexicon: missing column '" + *missing + "'");
  }
  const auto label_col = *header.find("raw_label");
  const auto group_col = *header.find("group");
  OccupationLexicon lexicon;
  while (auto row = reader.next()) {
    if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
    if (row->size() != header.names().size()) {
      throw DataError("occupation lexicon line " + std::to_string(reader.line()) + ": wrong field count");
    }
    const auto group = parse_occupation_group((*row)[group_col]);
    if (!group) {
      throw DataError("occupation lexicon line " + std::to_string(reader.line()) +
                      ": unknown group '" + (*row)[group_col] + "'");
    }
    lexicon.add((*row)[label_col], *group);
  }
  return lexicon;
}

OccupationLexicon OccupationLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open occupation lexicon " + path.string());
  return load(in);
}

OccupationLexicon::Match OccupationLexicon::lookup(std::string_view raw_label) const {
  const auto label = text::fold_key(raw_label);
  if (label.empty()) return {};
  if (auto it = entries_.find(label); it != entries_.end()) return {it->second, it->first};

  // Longest entry wins; equal lengths go to the earliest occurrence, then to
  // the lexicographically smaller entry (map order).
  const std::string* best = nullptr;
  std::size_t best_pos = 0;
  OccupationGroup best_group = OccupationGroup::other;
  for (const auto& [entry, group] : entries_) {
    if (entry.size() > label.size()) continue;
    if (best && entry.size() < best->size()) continue;
    const auto pos = find_word(label, entry);
    if (pos == std::string_view::npos) continue;
    if (!best || entry.size() > best->size() || pos < best_pos) {
      best = &entry;
      best_pos = pos;
      best_group = group;
    }
  }
  if (!best) return {};
  return {best_group, *best};
}

OccupationGroup map_occupation(std::string_view raw_label, const OccupationLexicon& lexicon,
                               UnmatchedLabels* unmatched) {
  auto match = lexicon.lookup(raw_label);
  if (match.matched_label.empty() && unmatched) {
    ++(*unmatched)[std::string(text::trim(raw_label))];
  }
  return match.group;
}

TransliterationTable TransliterationTable::german_default() {
  TransliterationTable t;
  // Title words, whole-word and case-sensitive.
  for (auto [from, to] : std::initializer_list<std::pair<const char*, const char*>>{
           {"Sankt", "Saint"},       {"St.", "Saint"},       {"Hl.", "Saint"},
           {"Kaiser", "Emperor"},    {"Kaiserin", "Empress"}, {"König", "King"},
           {"Königin", "Queen"},     {"Erzherzog", "Archduke"}, {"Erzherzogin", "Archduchess"},
           {"Herzog", "Duke"},       {"Fürst", "Prince"},    {"Prinz", "Prince"},
           {"Graf", "Count"},        {"Gräfin", "Countess"}, {"Freiherr", "Baron"},
           {"Papst", "Pope"},        {"Kardinal", "Cardinal"}, {"Bischof", "Bishop"},
           {"Bürgermeister", "Mayor"},
       }) {
    t.add_term(from, to);
  }
  for (auto [from, to] : std::initializer_list<std::pair<const char*, const char*>>{
           {"ä", "ae"}, {"ö", "oe"}, {"ü", "ue"}, {"Ä", "Ae"}, {"Ö", "Oe"}, {"Ü", "Ue"},
           {"ß", "ss"}, {"ẞ", "SS"},
       }) {
    t.add_character(from, to);
  }
  return t;
}

TransliterationTable TransliterationTable::load(std::istream& in) {
  TransliterationTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with('#')) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      parts.push_back(line.substr(start, tab - start));
    }
    parts.push_back(line.substr(start));
    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty()) {
      throw DataError("transliteration table line " + std::to_string(lineno) + ": expected from<TAB>to[<TAB>word]");
    }
    if (parts.size() == 3 && parts[2] == "word") {
      t.add_term(parts[0], parts[1]);
    } else if (parts.size() == 2) {
      t.add_character(parts[0], parts[1]);
    } else {
      throw DataError("transliteration table line " + std::to_string(lineno) + ": unknown flag '" + parts[2] + "'");
    }
  }
  return t;
}

TransliterationTable TransliterationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open transliteration table " + path.string());
  return load(in);
}

std::string transliterate_name(std::string_view name, const TransliterationTable& table) {
  std::string s(name);
  for (const auto& [from, to] : table.terms()) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      const auto end = pos + from.size();
      const bool left = pos == 0 || !is_alnum_utf8_start(static_cast<unsigned char>(s[pos - 1]));
      const bool right = end == s.size() || !is_alnum_utf8_start(static_cast<unsigned char>(s[end]));
      if (left && right) {
        s.replace(pos, from.size(), to);
        pos += to.size();
      } else {
        pos = end;
      }
    }
  }
  for (const auto& [from, to] : table.characters()) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  }
  return s;
}

}  // namespace streetonomics
