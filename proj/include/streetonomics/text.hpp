#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace streetonomics::text {

/// Decodes UTF-8, replacing invalid sequences with U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Search key for a name: diacritics stripped, case-folded, punctuation turned
/// into spaces and whitespace collapsed. "Rue de l'Abbé-Grégoire" -> "rue de l abbe gregoire".
std::string fold_key(std::string_view name);

/// True if the string contains any Unicode decimal digit (general category Nd).
bool contains_decimal_digit(std::string_view s);
bool is_decimal_digit(char32_t c) noexcept;

std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);

}  // namespace streetonomics::text
