#pragma once

// Number-token scanning shared by the answer judge and dataset loading.

#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cdist {

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Consumes a currency marker at `i` if present ($, or UTF-8 €/£), returns
// its byte length.
inline std::size_t currency_len(std::string_view s, std::size_t i) {
  if (i < s.size() && s[i] == '$') return 1;
  if (i + 2 < s.size() && s.compare(i, 3, "\xE2\x82\xAC") == 0) return 3;  // €
  if (i + 1 < s.size() && s.compare(i, 2, "\xC2\xA3") == 0) return 2;      // £
  return 0;
}

}  // namespace detail

// Strips sign-preserving decoration from a scanned token: currency symbols,
// thousands commas, and a bare trailing decimal point.
inline std::string normalize_number_token(std::string_view tok) {
  std::string out;
  std::size_t i = 0;
  if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) out += tok[i++];
  while (i < tok.size()) {
    std::size_t cur = detail::currency_len(tok, i);
    if (cur > 0) {
      i += cur;
      continue;
    }
    if (tok[i] == ',') {
      ++i;
      continue;
    }
    out += tok[i++];
  }
  if (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

inline std::optional<double> parse_number(std::string_view tok) {
  std::string clean = normalize_number_token(tok);
  if (clean.empty()) return std::nullopt;
  const char* begin = clean.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + clean.size()) return std::nullopt;
  return v;
}

// Scans raw model text for number tokens: optional sign, optional currency
// marker, digits with embedded commas, optional fractional part.  A bare
// trailing '.' (sentence punctuation) is not part of the token.
inline std::vector<std::string> find_number_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    std::size_t j = i;
    if (s[j] == '+' || s[j] == '-') ++j;
    j += detail::currency_len(s, j);
    if (j >= s.size() || !detail::is_digit(s[j])) {
      ++i;
      continue;
    }
    while (j < s.size() && (detail::is_digit(s[j]) || s[j] == ',')) ++j;
    while (j > start && s[j - 1] == ',') --j;  // commas only between digits
    if (j + 1 < s.size() && s[j] == '.' && detail::is_digit(s[j + 1])) {
      ++j;
      while (j < s.size() && detail::is_digit(s[j])) ++j;
    }
    out.emplace_back(s.substr(start, j - start));
    i = j;
  }
  return out;
}

}  // namespace cdist
