#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cdist/cache_key.hpp"
#include "cdist/errors.hpp"
#include "cdist/message.hpp"
#include "cdist/util.hpp"

namespace cdist {

// One fixture rule.  Exactly one matcher is set: `substring` matches
// anywhere in the conversation text (all message contents joined by
// newlines); `exact_conversation_digest` pins a whole conversation.
struct MockRule {
  std::optional<std::string> substring;
  std::optional<std::string> exact_digest;
  std::string response;
};

// Scripted stand-in for a model endpoint.  Rules are checked in order and
// the first match wins, so fixtures put specific rules before generic ones.
class MockScript {
 public:
  MockScript() = default;

  static MockScript from_json(const json& j) {
    if (!j.is_array()) throw ConfigError("mock fixture must be a JSON array of rules");
    MockScript s;
    for (const auto& entry : j) {
      if (!entry.is_object() || !entry.contains("match") || !entry.contains("response")) {
        throw ConfigError("mock rule needs {match, response}");
      }
      const json& m = entry.at("match");
      MockRule r;
      if (m.contains("substring")) r.substring = m.at("substring").get<std::string>();
      if (m.contains("exact_conversation_digest")) {
        r.exact_digest = m.at("exact_conversation_digest").get<std::string>();
      }
      if (!r.substring && !r.exact_digest) {
        throw ConfigError("mock rule match needs substring or exact_conversation_digest");
      }
      if (r.substring && r.exact_digest) {
        throw ConfigError("mock rule match must use a single matcher");
      }
      r.response = entry.at("response").get<std::string>();
      s.rules_.push_back(std::move(r));
    }
    return s;
  }

  static MockScript from_file(const std::filesystem::path& p) {
    json j;
    try {
      j = json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw ConfigError("mock fixture " + p.string() + ": " + e.what());
    }
    return from_json(j);
  }

  void add_substring_rule(std::string needle, std::string response) {
    MockRule r;
    r.substring = std::move(needle);
    r.response = std::move(response);
    rules_.push_back(std::move(r));
  }

  void add_digest_rule(std::string digest, std::string response) {
    MockRule r;
    r.exact_digest = std::move(digest);
    r.response = std::move(response);
    rules_.push_back(std::move(r));
  }

  std::optional<std::string> respond(const Conversation& c) const {
    const std::string text = conversation_text(c);
    std::string digest;  // computed lazily; most fixtures are substring-only
    for (const auto& r : rules_) {
      if (r.substring) {
        if (text.find(*r.substring) != std::string::npos) return r.response;
      } else if (r.exact_digest) {
        if (digest.empty()) digest = conversation_digest(c);
        if (digest == *r.exact_digest) return r.response;
      }
    }
    return std::nullopt;
  }

  bool empty() const { return rules_.empty(); }
  std::size_t size() const { return rules_.size(); }

 private:
  std::vector<MockRule> rules_;
};

}  // namespace cdist
