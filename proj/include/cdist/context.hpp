#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "cdist/concepts.hpp"
#include "cdist/gateway.hpp"
#include "cdist/judge.hpp"
#include "cdist/ledger.hpp"

namespace cdist {

// Shared plumbing threaded through the pipeline stages.  An empty run_dir
// means a fully in-memory run: no transcripts or artifacts are written.
struct PipelineContext {
  Gateway* gateway = nullptr;
  RunLedger* ledger = nullptr;
  JudgePolicy judge_policy;
  std::filesystem::path run_dir;
  int parallelism = 4;

  bool persists() const { return !run_dir.empty(); }

  void note(const std::string& text) const {
    if (ledger) ledger->append("note", json{{"text", text}});
  }

  // Ledger gate for concept lifecycle events.  Each concept id advances
  // monotonically (induced < refined < accepted/rejected) and every status
  // is logged at most once, so re-encounters of a settled concept — e.g. a
  // re-induction round that regenerates a rejected text — never write
  // duplicate or out-of-order transitions.  Returns whether it logged.
  bool log_concept(const Concept& c, json extra = json::object()) const {
    if (!ledger) return false;
    int rank = 0;
    switch (c.status) {
      case ConceptStatus::induced: rank = 0; break;
      case ConceptStatus::refined: rank = 1; break;
      case ConceptStatus::accepted:
      case ConceptStatus::rejected: rank = 2; break;
    }
    {
      std::lock_guard<std::mutex> lk(*concept_log_mu_);
      auto it = concept_log_rank_->find(c.concept_id);
      if (it != concept_log_rank_->end() && it->second >= rank) return false;
      (*concept_log_rank_)[c.concept_id] = rank;
    }
    json j{{"concept_id", c.concept_id},
           {"status", concept_status_name(c.status)},
           {"text", c.text},
           {"batch_ref", c.batch_ref},
           {"provenance", c.provenance}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    ledger->append("concept", std::move(j));
    return true;
  }

  void save_artifact(const std::filesystem::path& rel, const json& content) const {
    if (!persists()) return;
    write_file_atomic(run_dir / rel, content.dump(2) + "\n");
  }

 private:
  std::shared_ptr<std::mutex> concept_log_mu_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::map<std::string, int>> concept_log_rank_ =
      std::make_shared<std::map<std::string, int>>();
};

}  // namespace cdist
