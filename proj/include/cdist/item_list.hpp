#pragma once

// Tolerant parser for the bulleted / numbered lists models produce.
// Never throws on arbitrary text; an unlistable response simply yields no
// items and the caller decides whether that is fatal.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cdist/util.hpp"

namespace cdist {

namespace detail {

// Returns the length of a list marker at the start of `s` ("- ", "* ",
// "• ", "3. ", "12) "), or 0 if there is none.  Markers require trailing
// whitespace so negative numbers and "*emphasis*" don't count.
inline std::size_t list_marker_len(std::string_view s) {
  auto followed_by_space = [&](std::size_t n) { return n < s.size() && (s[n] == ' ' || s[n] == '\t'); };
  if (!s.empty() && (s[0] == '-' || s[0] == '*') && followed_by_space(1)) return 2;
  if (s.size() >= 3 && s.compare(0, 3, "\xE2\x80\xA2") == 0 && followed_by_space(3)) return 4;  // •
  std::size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')') && followed_by_space(i + 1)) {
    return i + 2;
  }
  return 0;
}

// Strips any stack of leading markers from an item's text ("- - x" -> "x")
// so parsed items never begin with a marker themselves.
inline std::string strip_leading_markers(std::string s) {
  for (;;) {
    std::string t = trim(s);
    std::size_t n = list_marker_len(t);
    if (n == 0) return t;
    s = t.substr(n);
  }
}

}  // namespace detail

// Extracts list items from free-form model text:
//   * a line starting (after indentation) with a list marker opens an item;
//   * an indented, unmarked line continues the previous item (joined by a
//     single space);
//   * unindented prose and blank lines are ignored.
// Returns an empty vector when no list is present.
inline std::vector<std::string> parse_item_list(const std::string& raw) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    std::string_view line(raw.data() + pos, (eol == std::string::npos ? raw.size() : eol) - pos);
    pos = eol == std::string::npos ? raw.size() + 1 : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::size_t indent = 0;
    while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t')) ++indent;
    std::string_view body = line.substr(indent);
    if (body.empty()) continue;

    std::size_t marker = detail::list_marker_len(body);
    if (marker > 0) {
      items.push_back(detail::strip_leading_markers(std::string(body.substr(marker))));
    } else if (indent > 0 && !items.empty()) {
      std::string cont = trim(body);
      if (!cont.empty()) {
        if (!items.back().empty()) items.back() += ' ';
        items.back() += cont;
      }
    }
    // Unindented, unmarked lines are surrounding prose: skipped.
  }
  std::vector<std::string> out;
  for (auto& it : items) {
    if (!it.empty()) out.push_back(std::move(it));
  }
  return out;
}

// Renders items one per line with the given marker style; the inverse of
// parse_item_list for well-formed content.
inline std::string render_item_list(const std::vector<std::string>& items,
                                    std::string_view style = "- ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (style == "n." || style == "n)") {
      out += std::to_string(i + 1);
      out += style[1];
      out += ' ';
    } else {
      out += style;
    }
    out += items[i];
    out += '\n';
  }
  return out;
}

}  // namespace cdist
