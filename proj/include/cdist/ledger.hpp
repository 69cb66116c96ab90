#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "cdist/errors.hpp"
#include "cdist/util.hpp"

namespace cdist {

// One entry in the append-only run ledger.  `kind` is a small closed set:
// call, judgement, failure, concept, verification, accuracy, budget, note.
struct LedgerEvent {
  std::uint64_t seq = 0;
  std::int64_t ts_ms = 0;
  std::string kind;
  json data;
};

inline json ledger_event_to_json(const LedgerEvent& e) {
  return json{{"seq", e.seq}, {"ts_ms", e.ts_ms}, {"kind", e.kind}, {"data", e.data}};
}

inline LedgerEvent ledger_event_from_json(const json& j) {
  LedgerEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.ts_ms = j.at("ts_ms").get<std::int64_t>();
  e.kind = j.at("kind").get<std::string>();
  e.data = j.at("data");
  return e;
}

// Append-only record of everything a run did: model calls, judgements,
// harvested failures, concept lifecycle transitions, verification outcomes,
// accuracy summaries.  Always kept in memory; mirrored to a JSONL file when
// constructed with a path.  Thread-safe appends with strictly increasing
// sequence numbers.
class RunLedger {
 public:
  RunLedger() = default;

  // Empty path means memory-only.  With append=true an existing file is
  // extended (sequence numbers continue from its line count) so resumed
  // activity lands in the same audit trail.
  explicit RunLedger(const std::filesystem::path& file_path, bool append = false) {
    if (file_path.empty()) return;
    if (file_path.has_parent_path()) std::filesystem::create_directories(file_path.parent_path());
    if (append && std::filesystem::exists(file_path)) {
      std::ifstream in(file_path, std::ios::binary);
      std::string line;
      while (std::getline(in, line)) {
        if (!trim(line).empty()) ++next_seq_;
      }
    }
    file_.emplace(file_path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!*file_) throw Error("cannot open ledger file " + file_path.string());
  }

  std::uint64_t append(std::string kind, json data) {
    std::lock_guard<std::mutex> lk(mu_);
    LedgerEvent e;
    e.seq = next_seq_++;
    e.ts_ms = now_ms();
    e.kind = std::move(kind);
    e.data = std::move(data);
    if (file_) {
      *file_ << ledger_event_to_json(e).dump() << '\n';
      file_->flush();
    }
    events_.push_back(std::move(e));
    return events_.back().seq;
  }

  std::vector<LedgerEvent> snapshot() const {
    std::lock_guard<std::mutex> lk(mu_);
    return events_;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return events_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEvent> events_;
  std::optional<std::ofstream> file_;
  std::uint64_t next_seq_ = 0;
};

// Serialized events with wall-clock fields zeroed, for byte-level
// comparison of two runs that should be identical modulo timing.
inline std::vector<std::string> masked_ledger_lines(const std::vector<LedgerEvent>& events) {
  std::vector<std::string> out;
  out.reserve(events.size());
  for (LedgerEvent e : events) {
    e.ts_ms = 0;
    if (e.data.is_object() && e.data.contains("latency_ms")) e.data["latency_ms"] = 0;
    if (e.data.is_object() && e.data.contains("source")) e.data["source"] = "";
    out.push_back(ledger_event_to_json(e).dump());
  }
  return out;
}

// Replays concept lifecycle events and returns the ids whose final status
// is "accepted", in acceptance order.  This is the audit-side ground truth
// for what the optimized prompt may contain.
inline std::vector<std::string> replay_accepted_concept_ids(const std::vector<LedgerEvent>& events) {
  std::vector<std::string> out;
  for (const auto& e : events) {
    if (e.kind != "concept") continue;
    if (e.data.value("status", "") == "accepted") out.push_back(e.data.value("concept_id", ""));
  }
  return out;
}

}  // namespace cdist
