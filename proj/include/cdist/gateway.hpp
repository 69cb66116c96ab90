#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "cdist/cache_key.hpp"
#include "cdist/decoding.hpp"
#include "cdist/errors.hpp"
#include "cdist/ledger.hpp"
#include "cdist/message.hpp"
#include "cdist/mock.hpp"
#include "cdist/util.hpp"

namespace cdist {

enum class Backend { http, mock };

inline const char* backend_name(Backend b) { return b == Backend::http ? "http" : "mock"; }

inline Backend backend_from_name(std::string_view s) {
  if (s == "http") return Backend::http;
  if (s == "mock") return Backend::mock;
  throw ConfigError("unknown backend: " + std::string(s));
}

// Everything needed to address one model.  `id` is the run-local handle
// ("weak", "strong", "transfer:foo"); `model_name` is what goes on the
// wire and defaults to the id when empty.  `fixture_path` only applies to
// mock-backed handles.
struct ModelHandle {
  std::string id;
  Backend backend = Backend::mock;
  std::string endpoint;
  std::string model_name;
  DecodingParams decoding;
  std::string credential_env;  // empty -> gateway default
  std::filesystem::path fixture_path;

  std::string effective_model_name() const { return model_name.empty() ? id : model_name; }
};

enum class CallSource { live, cache, mock };

inline const char* call_source_name(CallSource s) {
  switch (s) {
    case CallSource::live: return "live";
    case CallSource::cache: return "cache";
    case CallSource::mock: return "mock";
  }
  return "live";
}

// Full record of one completion: the exact conversation, decoding params,
// response text, and where the answer came from.  This is both the cache
// file format and the ledger "call" event payload.
struct CallRecord {
  std::string cache_key;
  std::string model_id;
  std::string model_name;
  Conversation conversation;
  DecodingParams decoding;
  std::string response;
  std::int64_t latency_ms = 0;
  CallSource source = CallSource::live;
};

inline json call_record_to_json(const CallRecord& r) {
  return json{{"cache_key", r.cache_key},
              {"model_id", r.model_id},
              {"model_name", r.model_name},
              {"conversation", conversation_to_json(r.conversation)},
              {"decoding", decoding_to_json(r.decoding)},
              {"response", r.response},
              {"latency_ms", r.latency_ms},
              {"source", call_source_name(r.source)}};
}

inline CallRecord call_record_from_json(const json& j) {
  CallRecord r;
  r.cache_key = j.at("cache_key").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.model_name = j.value("model_name", r.model_id);
  r.conversation = conversation_from_json(j.at("conversation"));
  r.decoding = decoding_from_json(j.at("decoding"));
  r.response = j.at("response").get<std::string>();
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  std::string s = j.value("source", "live");
  r.source = s == "cache" ? CallSource::cache : (s == "mock" ? CallSource::mock : CallSource::live);
  return r;
}

struct GatewayStats {
  std::uint64_t total_calls = 0;
  std::uint64_t live_calls = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t mock_calls = 0;
};

// Interface to the live HTTP chat-completion backend; the concrete client
// lives in http_client.hpp so mock-only builds never touch networking
// code.  Implementations return the assistant text or throw.
struct HttpTransport {
  virtual ~HttpTransport() = default;
  virtual std::string complete(const ModelHandle& handle, const Conversation& conversation,
                               const std::string& default_credential_env) = 0;
};

// Single entry point for every model call in a run.  Responsibilities:
// dispatch to the mock script or HTTP transport, consult/populate the
// content-addressed response cache, count calls, and (via complete())
// append a full call record to the run ledger.
class Gateway {
 public:
  // Empty cache_dir disables caching; null ledger disables event logging
  // through complete() (invoke() never logs).
  Gateway(std::filesystem::path cache_dir, RunLedger* ledger, int in_flight_limit = 4)
      : cache_dir_(std::move(cache_dir)), ledger_(ledger), limiter_(in_flight_limit) {}

  void set_transport(std::shared_ptr<HttpTransport> t) { transport_ = std::move(t); }
  void set_default_credential_env(std::string env) { default_credential_env_ = std::move(env); }

  void register_mock(const std::string& handle_id, MockScript script) {
    std::lock_guard<std::mutex> lk(mu_);
    mocks_[handle_id] = std::move(script);
  }

  bool has_mock(const std::string& handle_id) const {
    std::lock_guard<std::mutex> lk(mu_);
    return mocks_.count(handle_id) > 0;
  }

  // Resolve a completion without logging it.  Callers that parallelize
  // use this, then log records in a deterministic order via log_call().
  CallRecord invoke(const ModelHandle& handle, const Conversation& conversation) {
    validate_conversation(conversation);
    CallRecord rec;
    rec.model_id = handle.id;
    rec.model_name = handle.effective_model_name();
    rec.conversation = conversation;
    rec.decoding = handle.decoding;
    rec.cache_key = cache_key(rec.model_name, conversation, handle.decoding);

    if (auto cached = cache_lookup(rec.cache_key)) {
      rec.response = cached->response;
      rec.latency_ms = 0;
      rec.source = CallSource::cache;
      bump(rec.source);
      return rec;
    }

    Limiter::Guard g(limiter_);
    std::int64_t t0 = now_ms();
    if (handle.backend == Backend::mock) {
      rec.response = mock_respond(handle, conversation);
      rec.source = CallSource::mock;
    } else {
      std::shared_ptr<HttpTransport> t;
      {
        std::lock_guard<std::mutex> lk(mu_);
        t = transport_;
      }
      if (!t) throw TransportError("no HTTP transport configured for handle '" + handle.id + "'");
      rec.response = t->complete(handle, conversation, default_credential_env_);
      rec.source = CallSource::live;
    }
    rec.latency_ms = now_ms() - t0;
    cache_store(rec);
    bump(rec.source);
    return rec;
  }

  // invoke() + a ledger "call" event; the common path for sequential call
  // sites.
  std::string complete(const ModelHandle& handle, const Conversation& conversation) {
    CallRecord rec = invoke(handle, conversation);
    log_call(rec);
    return rec.response;
  }

  void log_call(const CallRecord& rec) {
    if (ledger_) ledger_->append("call", call_record_to_json(rec));
  }

  GatewayStats stats() const {
    std::lock_guard<std::mutex> lk(mu_);
    return stats_;
  }

  // Budget meter: every completion counts, cache hits and mocks included,
  // so replayed runs hit budget limits at the same points as live ones.
  std::uint64_t total_calls() const {
    std::lock_guard<std::mutex> lk(mu_);
    return stats_.total_calls;
  }

  bool cache_enabled() const { return !cache_dir_.empty(); }
  const std::filesystem::path& cache_dir() const { return cache_dir_; }

 private:
  std::string mock_respond(const ModelHandle& handle, const Conversation& conversation) {
    const MockScript* script = nullptr;
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = mocks_.find(handle.id);
      if (it != mocks_.end()) script = &it->second;
    }
    if (!script) throw MockMissError("no mock fixture registered for handle '" + handle.id + "'");
    auto resp = script->respond(conversation);
    if (!resp) {
      std::string text = conversation_text(conversation);
      if (text.size() > 120) text = text.substr(0, 120) + "...";
      throw MockMissError("mock '" + handle.id + "' has no rule matching conversation: " + text);
    }
    return *resp;
  }

  std::filesystem::path cache_path(const std::string& key) const {
    return cache_dir_ / key.substr(0, 2) / (key + ".json");
  }

  std::optional<CallRecord> cache_lookup(const std::string& key) const {
    if (!cache_enabled()) return std::nullopt;
    std::filesystem::path p = cache_path(key);
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
      return call_record_from_json(json::parse(read_file(p)));
    } catch (const std::exception& e) {
      throw Error("corrupt cache entry " + p.string() + ": " + e.what());
    }
  }

  // Write-once: an existing entry is never rewritten, which keeps replay
  // byte-stable and makes concurrent writers race-free (same content).
  void cache_store(const CallRecord& rec) {
    if (!cache_enabled()) return;
    std::filesystem::path p = cache_path(rec.cache_key);
    std::error_code ec;
    if (std::filesystem::exists(p, ec)) return;
    write_file_atomic(p, call_record_to_json(rec).dump(2) + "\n");
  }

  void bump(CallSource s) {
    std::lock_guard<std::mutex> lk(mu_);
    ++stats_.total_calls;
    if (s == CallSource::live) ++stats_.live_calls;
    if (s == CallSource::cache) ++stats_.cache_hits;
    if (s == CallSource::mock) ++stats_.mock_calls;
  }

  std::filesystem::path cache_dir_;
  RunLedger* ledger_;
  Limiter limiter_;
  mutable std::mutex mu_;
  std::map<std::string, MockScript> mocks_;
  std::shared_ptr<HttpTransport> transport_;
  GatewayStats stats_;
  std::string default_credential_env_ = "CDIST_API_KEY";
};

}  // namespace cdist
