#pragma once

// Live chat-completion transport.  Kept out of gateway.hpp so binaries that
// only ever use mock backends never compile the HTTP stack.

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "cdist/gateway.hpp"

namespace cdist {

struct RetryPolicy {
  int max_retries = 3;                             // after the initial attempt
  std::vector<int> backoff_ms = {1000, 4000, 16000};
  int timeout_ms = 120000;
};

struct ParsedUrl {
  std::string scheme_host_port;  // "http://127.0.0.1:8080"
  std::string path;              // "/v1/chat/completions"
};

inline ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must include scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
    out.path = "/";
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

// Request body on the wire: {model, messages[{role, content}], temperature,
// max_tokens, seed?}.
inline json chat_request_body(const ModelHandle& handle, const Conversation& conversation) {
  json body{{"model", handle.effective_model_name()},
            {"messages", conversation_to_json(conversation)},
            {"temperature", handle.decoding.temperature},
            {"max_tokens", handle.decoding.max_tokens}};
  if (handle.decoding.seed) body["seed"] = *handle.decoding.seed;
  return body;
}

// Self-check run on every outgoing request; also what the loopback test
// server uses to reject malformed requests.
inline void validate_chat_request(const json& body) {
  if (!body.is_object()) throw Error("chat request must be an object");
  if (!body.contains("model") || !body.at("model").is_string() ||
      body.at("model").get<std::string>().empty()) {
    throw Error("chat request missing model");
  }
  if (!body.contains("messages") || !body.at("messages").is_array() ||
      body.at("messages").empty()) {
    throw Error("chat request missing messages");
  }
  for (const auto& m : body.at("messages")) {
    if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
        !m.at("role").is_string() || !m.at("content").is_string()) {
      throw Error("chat request message needs string role and content");
    }
    role_from_name(m.at("role").get<std::string>());
  }
  if (!body.contains("temperature") || !body.at("temperature").is_number()) {
    throw Error("chat request missing temperature");
  }
  if (!body.contains("max_tokens") || !body.at("max_tokens").is_number_integer()) {
    throw Error("chat request missing max_tokens");
  }
}

inline std::string parse_chat_response(const std::string& body_text) {
  json body;
  try {
    body = json::parse(body_text);
  } catch (const json::exception& e) {
    throw TransportError(std::string("unparseable completion response: ") + e.what());
  }
  if (!body.contains("choices") || !body.at("choices").is_array() || body.at("choices").empty()) {
    throw TransportError("completion response has no choices");
  }
  const json& first = body.at("choices").at(0);
  if (!first.contains("message") || !first.at("message").contains("content")) {
    throw TransportError("completion response choice has no message content");
  }
  return first.at("message").at("content").get<std::string>();
}

// HTTP client with bounded retries on transient failures (connection
// errors, 429, 5xx).  Auth failures and other 4xx are not retried.
class HttpChatTransport : public HttpTransport {
 public:
  explicit HttpChatTransport(RetryPolicy policy = {}) : policy_(std::move(policy)) {}

  std::string complete(const ModelHandle& handle, const Conversation& conversation,
                       const std::string& default_credential_env) override {
    if (handle.endpoint.empty()) {
      throw ConfigError("handle '" + handle.id + "' has no endpoint");
    }
    json body = chat_request_body(handle, conversation);
    validate_chat_request(body);

    std::string env_name =
        handle.credential_env.empty() ? default_credential_env : handle.credential_env;
    const char* key = env_name.empty() ? nullptr : std::getenv(env_name.c_str());
    if (!key || std::string(key).empty()) {
      throw AuthError("credential env var " + env_name + " is not set");
    }

    ParsedUrl url = parse_url(handle.endpoint);
    const std::string payload = body.dump();
    std::string last_failure;

    for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::size_t slot = static_cast<std::size_t>(attempt - 1);
        int delay = slot < policy_.backoff_ms.size() ? policy_.backoff_ms[slot]
                                                     : policy_.backoff_ms.back();
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      httplib::Client cli(url.scheme_host_port);
      cli.set_connection_timeout(policy_.timeout_ms / 1000, (policy_.timeout_ms % 1000) * 1000);
      cli.set_read_timeout(policy_.timeout_ms / 1000, (policy_.timeout_ms % 1000) * 1000);
      cli.set_write_timeout(policy_.timeout_ms / 1000, (policy_.timeout_ms % 1000) * 1000);
      httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

      auto res = cli.Post(url.path, headers, payload, "application/json");
      if (!res) {
        last_failure = "connection failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return parse_chat_response(res->body);
      if (res->status == 401 || res->status == 403) {
        throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
      }
      if (res->status == 429 || res->status >= 500) {
        last_failure = "HTTP " + std::to_string(res->status);
        continue;
      }
      throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    throw TransportError("request failed after " + std::to_string(policy_.max_retries + 1) +
                         " attempts; last: " + last_failure);
  }

 private:
  RetryPolicy policy_;
};

}  // namespace cdist
