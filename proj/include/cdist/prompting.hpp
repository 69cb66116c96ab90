#pragma once

// Prompt templates, placeholder substitution, and the rendering rule that
// turns (template, accepted concepts, example) into a conversation.  The
// base template text is immutable: concepts only ever join the prompt as a
// clearly delimited block, so stripping that block recovers the original
// prompt byte for byte.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cdist/concepts.hpp"
#include "cdist/digest.hpp"
#include "cdist/errors.hpp"
#include "cdist/message.hpp"
#include "cdist/tasks.hpp"
#include "cdist/util.hpp"

namespace cdist {

inline constexpr std::string_view kConceptsHeader = "Key concepts to follow:";

namespace detail {

inline bool placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace detail

// Placeholder names referenced as {name} in template text.  Braces not
// wrapping a well-formed name are literal text.
inline std::set<std::string> placeholders_in(std::string_view text) {
  std::set<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && detail::placeholder_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      out.insert(std::string(text.substr(i + 1, j - i - 1)));
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

// Single-pass substitution; binding values are inserted verbatim and never
// re-scanned, so braces inside data (code, JSON) are safe.
inline std::string substitute(std::string_view text,
                              const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      out += text[i++];
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && detail::placeholder_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      std::string name(text.substr(i + 1, j - i - 1));
      auto it = bindings.find(name);
      if (it == bindings.end()) throw MissingPlaceholderError(name);
      out += it->second;
      i = j + 1;
    } else {
      out += text[i++];
    }
  }
  return out;
}

struct PromptTemplate {
  std::string template_id;
  std::string system_text;
  std::string user_text;
  std::set<std::string> placeholder_set;

  static PromptTemplate make(std::string id, std::string system_text_in, std::string user_text_in) {
    PromptTemplate t;
    t.template_id = std::move(id);
    t.system_text = std::move(system_text_in);
    t.user_text = std::move(user_text_in);
    auto sys = placeholders_in(t.system_text);
    t.placeholder_set = placeholders_in(t.user_text);
    t.placeholder_set.insert(sys.begin(), sys.end());
    return t;
  }

  bool operator==(const PromptTemplate&) const = default;
};

// Template file format: front-matter lines ("key: value") up to a "---"
// separator, then "<system>" and "<user>" section headers, each owning the
// lines after it.  The only recognized front-matter key is template_id.
inline PromptTemplate parse_template_text(const std::string& text, const std::string& fallback_id) {
  std::string id = fallback_id;
  std::string sys, user;
  std::string* current = nullptr;
  bool in_front_matter = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, (eol == std::string::npos ? text.size() : eol) - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    if (in_front_matter) {
      if (trim(line) == "---") {
        in_front_matter = false;
        continue;
      }
      auto colon = line.find(':');
      if (colon != std::string::npos && trim(line.substr(0, colon)) == "template_id") {
        id = trim(line.substr(colon + 1));
        continue;
      }
      if (trim(line).empty()) continue;
      // No front matter at all: treat everything from here as body.
      in_front_matter = false;
    }
    if (trim(line) == "<system>") {
      current = &sys;
      continue;
    }
    if (trim(line) == "<user>") {
      current = &user;
      continue;
    }
    if (current) {
      *current += line;
      *current += '\n';
    } else if (!trim(line).empty()) {
      throw Error("template body must start with <system> or <user> section");
    }
  }
  auto chop = [](std::string& s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  };
  chop(sys);
  chop(user);
  if (user.empty()) throw Error("template has no <user> section");
  return PromptTemplate::make(id, sys, user);
}

inline PromptTemplate load_template(const std::filesystem::path& path) {
  return parse_template_text(read_file(path), path.stem().string());
}

enum class ConceptsPlacement { user_turn, system_turn };

inline const char* concepts_placement_name(ConceptsPlacement p) {
  return p == ConceptsPlacement::user_turn ? "user" : "system";
}

inline ConceptsPlacement concepts_placement_from_name(std::string_view s) {
  if (s == "user") return ConceptsPlacement::user_turn;
  if (s == "system") return ConceptsPlacement::system_turn;
  throw ConfigError("concepts_placement must be 'user' or 'system'");
}

// A prompt ready to render: base template, the concept block riding along
// with it, static bindings, and where the concept block goes.
struct RenderedPromptSpec {
  PromptTemplate tmpl;
  std::vector<Concept> concepts;
  std::map<std::string, std::string> static_bindings;
  ConceptsPlacement placement = ConceptsPlacement::user_turn;

  bool operator==(const RenderedPromptSpec&) const = default;
};

// The delimited block concepts occupy: header line, one "- text" line per
// concept, blank separator.  Empty concept lists contribute nothing at all.
inline std::string concepts_block(const std::vector<Concept>& concepts) {
  if (concepts.empty()) return "";
  std::string out(kConceptsHeader);
  out += '\n';
  for (const auto& c : concepts) {
    out += "- ";
    out += c.text;
    out += '\n';
  }
  out += '\n';
  return out;
}

// Renders the prompt spec against one example.  The example input binds both
// {question} and {input}; static bindings supply the rest.
inline Conversation render(const RenderedPromptSpec& spec, const TaskExample& example) {
  std::map<std::string, std::string> bindings = spec.static_bindings;
  bindings["question"] = example.input;
  bindings["input"] = example.input;
  std::string sys = substitute(spec.tmpl.system_text, bindings);
  std::string user = substitute(spec.tmpl.user_text, bindings);

  std::string block = concepts_block(spec.concepts);
  if (!block.empty()) {
    if (spec.placement == ConceptsPlacement::user_turn) {
      user = block + user;
    } else {
      std::string trimmed = block;
      while (!trimmed.empty() && trimmed.back() == '\n') trimmed.pop_back();
      sys = sys.empty() ? trimmed : sys + "\n\n" + trimmed;
    }
  }

  Conversation conv;
  if (!sys.empty()) conv.push_back({Role::system, sys});
  conv.push_back({Role::user, user});
  return conv;
}

// Builds the optimized prompt spec.  Every concept must have survived
// verification; the base template rides through untouched.
inline RenderedPromptSpec update_prompt(const PromptTemplate& base,
                                        const std::vector<Concept>& accepted,
                                        std::map<std::string, std::string> static_bindings = {},
                                        ConceptsPlacement placement = ConceptsPlacement::user_turn) {
  for (const auto& c : accepted) {
    if (c.status != ConceptStatus::accepted) {
      throw NonAcceptedConceptError("concept '" + c.text + "' has status " +
                                    concept_status_name(c.status) + ", not accepted");
    }
  }
  RenderedPromptSpec spec;
  spec.tmpl = base;
  spec.concepts = accepted;
  spec.static_bindings = std::move(static_bindings);
  spec.placement = placement;
  return spec;
}

inline json prompt_spec_to_json(const RenderedPromptSpec& spec) {
  json concepts = json::array();
  for (const auto& c : spec.concepts) concepts.push_back(concept_to_json(c));
  return json{{"template", json{{"template_id", spec.tmpl.template_id},
                                {"system_text", spec.tmpl.system_text},
                                {"user_text", spec.tmpl.user_text}}},
              {"concepts", concepts},
              {"static_bindings", spec.static_bindings},
              {"concepts_placement", concepts_placement_name(spec.placement)}};
}

inline RenderedPromptSpec prompt_spec_from_json(const json& j) {
  RenderedPromptSpec spec;
  const json& t = j.at("template");
  spec.tmpl = PromptTemplate::make(t.at("template_id").get<std::string>(),
                                   t.value("system_text", ""), t.at("user_text").get<std::string>());
  for (const auto& c : j.value("concepts", json::array())) {
    spec.concepts.push_back(concept_from_json(c));
  }
  if (j.contains("static_bindings")) {
    spec.static_bindings = j.at("static_bindings").get<std::map<std::string, std::string>>();
  }
  spec.placement = concepts_placement_from_name(j.value("concepts_placement", "user"));
  return spec;
}

// Stable identity of a prompt spec; recorded with harvested failures so a
// failure is traceable to the exact prompt that produced it.
inline std::string prompt_spec_digest(const RenderedPromptSpec& spec) {
  return sha256_hex("cdist-promptspec-v1\n" + prompt_spec_to_json(spec).dump());
}

// The plain instruction text of the base prompt, used when a meta prompt
// needs to show "the prompt that was used" without concept decoration.
inline std::string base_prompt_text(const RenderedPromptSpec& spec) {
  auto it = spec.static_bindings.find("initial_prompt");
  if (it != spec.static_bindings.end()) return it->second;
  return spec.tmpl.user_text;
}

}  // namespace cdist
