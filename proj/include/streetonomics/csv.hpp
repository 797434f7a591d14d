#pragma once

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// CRLF or LF line endings, UTF-8 passthrough.

#include <cstddef>
#include <istream>
#include <initializer_list>
#include <optional>
#include <span>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace streetonomics::csv {

using Row = std::vector<std::string>;

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Lines starting with '#' before
  /// the first record are skipped when skip_comments is set.
  std::optional<Row> next();

  /// 1-based line number where the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

  /// Set when the last record ended inside an unterminated quote.
  bool last_was_malformed() const noexcept { return malformed_; }

  bool skip_comments = true;

private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
  bool malformed_ = false;
  bool seen_record_ = false;
};

/// Column positions resolved from a header row.
class Header {
public:
  explicit Header(Row names);
  std::optional<std::size_t> find(std::string_view column) const;
  /// First required column that is absent, if any.
  std::optional<std::string> first_missing(std::span<const std::string_view> required) const;
  const Row& names() const noexcept { return names_; }

private:
  Row names_;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, std::span<const std::string> fields);
void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);

}  // namespace streetonomics::csv
