#pragma once

// In-process chat-completions endpoint for transport and replay tests.
// Every request is schema-checked with the library's own validator and
// authenticated against a bearer token; responses come from per-model
// MockScripts.  The hit counter is the ground truth for "no live traffic".

#include <httplib.h>

#include <cdist/cdist.hpp>
#include <cdist/http_client.hpp>

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace testsupport {

class LoopbackServer {
 public:
  explicit LoopbackServer(std::string api_key = "test-key") : api_key_(std::move(api_key)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LoopbackServer() { stop(); }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  void add_script(const std::string& model_name, cdist::MockScript script) {
    std::lock_guard<std::mutex> lk(mu_);
    scripts_[model_name] = std::move(script);
  }

  // The next `count` requests fail with `status` before any script lookup.
  void inject_failures(int count, int status) {
    fail_status_.store(status);
    fail_next_.store(count);
  }

  // The next request gets this exact body with HTTP 200 (for response-parse
  // tests).
  void set_raw_response_once(std::string body) {
    std::lock_guard<std::mutex> lk(mu_);
    raw_once_ = std::move(body);
  }

  int port() const { return port_; }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t bad_requests() const { return bad_requests_.load(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    hits_.fetch_add(1);
    if (req.get_header_value("Authorization") != "Bearer " + api_key_) {
      res.status = 401;
      res.set_content("{\"error\":\"bad credentials\"}", "application/json");
      return;
    }
    cdist::json body;
    try {
      body = cdist::json::parse(req.body);
      cdist::validate_chat_request(body);
    } catch (const std::exception& e) {
      bad_requests_.fetch_add(1);
      res.status = 400;
      res.set_content(cdist::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    if (fail_next_.load() > 0) {
      fail_next_.fetch_sub(1);
      res.status = fail_status_.load();
      res.set_content("{\"error\":\"injected failure\"}", "application/json");
      return;
    }
    {
      std::lock_guard<std::mutex> lk(mu_);
      if (raw_once_) {
        res.set_content(*raw_once_, "application/json");
        raw_once_.reset();
        return;
      }
    }
    std::string model = body.at("model").get<std::string>();
    cdist::Conversation conv = cdist::conversation_from_json(body.at("messages"));
    std::optional<std::string> out;
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = scripts_.find(model);
      if (it != scripts_.end()) out = it->second.respond(conv);
    }
    if (!out) {
      res.status = 404;
      res.set_content("{\"error\":\"no scripted response for this conversation\"}",
                      "application/json");
      return;
    }
    cdist::json reply{
        {"id", "chatcmpl-loopback"},
        {"object", "chat.completion"},
        {"model", model},
        {"choices",
         cdist::json::array(
             {cdist::json{{"index", 0},
                          {"message", cdist::json{{"role", "assistant"}, {"content", *out}}},
                          {"finish_reason", "stop"}}})}};
    res.set_content(reply.dump(), "application/json");
  }

  std::string api_key_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> bad_requests_{0};
  std::atomic<int> fail_next_{0};
  std::atomic<int> fail_status_{500};
  std::mutex mu_;
  std::map<std::string, cdist::MockScript> scripts_;
  std::optional<std::string> raw_once_;
};

}  // namespace testsupport
