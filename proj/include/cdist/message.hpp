#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "cdist/errors.hpp"

namespace cdist {

using json = nlohmann::json;

enum class Role { system, user, assistant };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

inline Role role_from_name(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw Error("unknown message role: " + std::string(s));
}

struct Message {
  Role role;
  std::string content;

  bool operator==(const Message&) const = default;
};

using Conversation = std::vector<Message>;

// Wire shape shared with the chat-completion request body.
inline json message_to_json(const Message& m) {
  return json{{"role", role_name(m.role)}, {"content", m.content}};
}

inline Message message_from_json(const json& j) {
  if (!j.is_object() || !j.contains("role") || !j.contains("content")) {
    throw Error("malformed message object");
  }
  return Message{role_from_name(j.at("role").get<std::string>()),
                 j.at("content").get<std::string>()};
}

inline json conversation_to_json(const Conversation& c) {
  json arr = json::array();
  for (const auto& m : c) arr.push_back(message_to_json(m));
  return arr;
}

inline Conversation conversation_from_json(const json& j) {
  if (!j.is_array()) throw Error("conversation must be an array");
  Conversation c;
  for (const auto& m : j) c.push_back(message_from_json(m));
  return c;
}

// All message contents joined by newlines; what mock substring rules match.
inline std::string conversation_text(const Conversation& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += '\n';
    out += c[i].content;
  }
  return out;
}

// A well-formed conversation is non-empty and keeps any system message at
// the front (single leading system turn).
inline void validate_conversation(const Conversation& c) {
  if (c.empty()) throw Error("conversation must not be empty");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].role == Role::system && i != 0) {
      throw Error("system message only allowed in first position");
    }
  }
}

}  // namespace cdist
