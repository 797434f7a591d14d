#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "streetonomics/core.hpp"

namespace streetonomics {

/// Raw occupation label -> occupation group. Labels are matched on their
/// fold_key() form. Every group's own identifier and display label are always
/// present, so mapping a canonical label returns its group.
class OccupationLexicon {
public:
  OccupationLexicon();

  /// CSV with header `raw_label,group`. Throws DataError on unknown groups.
  static OccupationLexicon load(std::istream& in);
  static OccupationLexicon load(const std::filesystem::path& path);

  void add(std::string_view raw_label, OccupationGroup group);
  std::size_t size() const noexcept { return entries_.size(); }

  struct Match {
    OccupationGroup group = OccupationGroup::other;
    std::string matched_label;  // empty when unmatched
  };

  /// Longest whole-word match of a lexicon entry inside the label.
  Match lookup(std::string_view raw_label) const;

private:
  std::map<std::string, OccupationGroup, std::less<>> entries_;
};

/// Labels that fell through to `other`, with occurrence counts.
using UnmatchedLabels = std::map<std::string, std::size_t>;

OccupationGroup map_occupation(std::string_view raw_label, const OccupationLexicon& lexicon,
                               UnmatchedLabels* unmatched = nullptr);

/// Deterministic German-to-ASCII substitutions: whole-word title terms first,
/// then characters (ä -> ae, ß -> ss, ...).
class TransliterationTable {
public:
  static TransliterationTable german_default();
  /// Tab-separated `from<TAB>to[<TAB>word]`; a third column `word` marks a
  /// whole-word term. '#' starts a comment line.
  static TransliterationTable load(std::istream& in);
  static TransliterationTable load(const std::filesystem::path& path);

  void add_term(std::string from, std::string to) { terms_.emplace_back(std::move(from), std::move(to)); }
  void add_character(std::string from, std::string to) { chars_.emplace_back(std::move(from), std::move(to)); }

  const auto& terms() const noexcept { return terms_; }
  const auto& characters() const noexcept { return chars_; }

private:
  std::vector<std::pair<std::string, std::string>> terms_;
  std::vector<std::pair<std::string, std::string>> chars_;
};

std::string transliterate_name(std::string_view name, const TransliterationTable& table);

}  // namespace streetonomics
