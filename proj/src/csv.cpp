#include "streetonomics/csv.hpp"

#include "streetonomics/text.hpp"

namespace streetonomics::csv {

std::optional<Row> Reader::next() {
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_;
    if (!seen_record_ && line_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (skip_comments && !seen_record_ && line.starts_with('#')) continue;
    break;
  }
  seen_record_ = true;
  record_line_ = line_;
  malformed_ = false;

  Row row;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  while (true) {
    if (!line.empty() && line.back() == '\r' && !in_quotes) line.pop_back();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty() && !was_quoted) {
        in_quotes = true;
        was_quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else {
        if (was_quoted) malformed_ = true;  // text after closing quote
        field.push_back(c);
      }
    }
    if (!in_quotes) break;
    if (!std::getline(in_, line)) {
      malformed_ = true;
      break;
    }
    ++line_;
    field.push_back('\n');
  }
  row.push_back(std::move(field));
  return row;
}

Header::Header(Row names) : names_(std::move(names)) {
  for (auto& n : names_) n = std::string(text::trim(n));
}

std::optional<std::size_t> Header::find(std::string_view column) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == column) return i;
  }
  return std::nullopt;
}

std::optional<std::string> Header::first_missing(std::span<const std::string_view> required) const {
  for (auto col : required) {
    if (!find(col)) return std::string(col);
  }
  return std::nullopt;
}

std::string quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) out << ',';
    first = false;
    out << quote(f);
  }
  out << '\n';
}

}  // namespace streetonomics::csv
