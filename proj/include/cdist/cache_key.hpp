#pragma once

#include <string>
#include <string_view>

#include "cdist/decoding.hpp"
#include "cdist/digest.hpp"
#include "cdist/message.hpp"

namespace cdist {

// Canonical request serialization, version "cdist-call-v1".  The cache key
// and the replay identity of a call are the SHA-256 of this byte string:
//
//   cdist-call-v1\n
//   model <byte-len>\n<model-bytes>\n
//   temperature <shortest-round-trip-decimal>\n
//   max_tokens <int>\n
//   seed <int|none>\n
//   messages <count>\n
//   <role> <content-byte-len>\n<content-bytes>\n     (once per message)
//
// Length prefixes make the encoding injective even when contents embed
// newlines; the version line lets the format evolve without silent reuse
// of stale cache entries.
inline std::string canonical_request(std::string_view model_name, const Conversation& conversation,
                                     const DecodingParams& decoding) {
  std::string out = "cdist-call-v1\n";
  out += "model " + std::to_string(model_name.size()) + "\n";
  out.append(model_name);
  out += '\n';
  out += "temperature " + format_double(decoding.temperature) + "\n";
  out += "max_tokens " + std::to_string(decoding.max_tokens) + "\n";
  out += "seed " + (decoding.seed ? std::to_string(*decoding.seed) : std::string("none")) + "\n";
  out += "messages " + std::to_string(conversation.size()) + "\n";
  for (const auto& m : conversation) {
    out += std::string(role_name(m.role)) + " " + std::to_string(m.content.size()) + "\n";
    out += m.content;
    out += '\n';
  }
  return out;
}

inline std::string cache_key(std::string_view model_name, const Conversation& conversation,
                             const DecodingParams& decoding) {
  return sha256_hex(canonical_request(model_name, conversation, decoding));
}

// Digest of the messages alone (no model, no decoding) — the identity mock
// fixtures may pin an exact conversation against.
inline std::string conversation_digest(const Conversation& conversation) {
  std::string out = "cdist-conv-v1\n";
  out += "messages " + std::to_string(conversation.size()) + "\n";
  for (const auto& m : conversation) {
    out += std::string(role_name(m.role)) + " " + std::to_string(m.content.size()) + "\n";
    out += m.content;
    out += '\n';
  }
  return sha256_hex(out);
}

}  // namespace cdist
