#pragma once

// The full improvement loop.  One Runner owns the gateway, ledger, and
// artifacts for a run directory and drives:
//
//   split -> base eval -> harvest failures -> per failure:
//     reasons -> induce -> refine -> probe gate -> accept / re-induce
//   -> updated prompt -> optimized eval -> report
//
// plus transfer evaluation of the accepted concepts onto other models.

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdist/config.hpp"
#include "cdist/context.hpp"
#include "cdist/evaluate.hpp"
#include "cdist/induction.hpp"
#include "cdist/prompting.hpp"
#include "cdist/report.hpp"
#include "cdist/verification.hpp"

namespace cdist {

class Runner {
 public:
  explicit Runner(RunConfig cfg, bool resume_ledger = false)
      : cfg_(std::move(cfg)),
        ledger_(cfg_.run_dir.empty() ? std::filesystem::path{} : cfg_.run_dir / "ledger.jsonl",
                resume_ledger),
        gateway_(cfg_.cache_dir, &ledger_, cfg_.parallelism) {
    gateway_.set_default_credential_env(cfg_.credential_env);
    for (const auto& [id, handle] : cfg_.models) {
      if (handle.backend == Backend::mock && !handle.fixture_path.empty()) {
        gateway_.register_mock(id, MockScript::from_file(handle.fixture_path));
      }
    }
    ctx_.gateway = &gateway_;
    ctx_.ledger = &ledger_;
    ctx_.judge_policy = cfg_.judge;
    ctx_.run_dir = cfg_.run_dir;
    ctx_.parallelism = cfg_.parallelism;
  }

  // Tests override fixtures programmatically instead of via files.
  void register_mock(const std::string& handle_id, MockScript script) {
    gateway_.register_mock(handle_id, std::move(script));
  }

  void set_transport(std::shared_ptr<HttpTransport> t) { gateway_.set_transport(std::move(t)); }

  Gateway& gateway() { return gateway_; }
  const RunLedger& ledger() const { return ledger_; }
  const RunConfig& config() const { return cfg_; }
  const RenderedPromptSpec& base_spec() const { return base_spec_; }
  const RenderedPromptSpec& optimized_spec() const { return final_spec_; }
  const Dataset& test_split() const { return test_; }
  const RunReport& report() const { return report_; }

  RunReport run() {
    cfg_.validate();
    load_inputs();
    persist_inputs();
    ledger_.append("note", json{{"text", "run started: " + cfg_.run_name}});

    report_ = RunReport{};
    report_.run_name = cfg_.run_name;
    const ModelHandle& weak = cfg_.model("weak");
    const ModelHandle& strong = cfg_.model("strong");

    AccuracyReport base_test = evaluate(ctx_, weak, base_spec_, test_, "base:test");
    report_.base_accuracy[weak.id]["test"] = base_test.accuracy;

    std::vector<Concept> accepted;
    std::set<std::string> accepted_ids;
    std::set<std::string> rejected_ids;

    bool stop = false;
    for (int outer = 0; outer < cfg_.outer_rounds && !stop; ++outer) {
      RenderedPromptSpec harvest_spec =
          outer == 0 ? base_spec_
                     : update_prompt(base_template_, accepted, base_spec_.static_bindings,
                                     base_spec_.placement);
      HarvestResult harvest = harvest_failures(ctx_, weak, harvest_spec, train_);
      if (outer == 0) report_.base_accuracy[weak.id]["train"] = harvest.accuracy.accuracy;
      report_.failures_harvested += static_cast<int>(harvest.failures.size());
      if (harvest.failures.empty()) {
        ctx_.note("no failures harvested in round " + std::to_string(outer) +
                  "; prompt already sufficient on train split");
        break;
      }
      for (const FailureRecord& failure : harvest.failures) {
        if (report_.failures_processed >= cfg_.budget.max_failures_processed) {
          budget_stop("max_failures_processed", cfg_.budget.max_failures_processed);
          stop = true;
          break;
        }
        if (gateway_.total_calls() >= cfg_.budget.max_total_calls) {
          budget_stop("max_total_calls", static_cast<int>(cfg_.budget.max_total_calls));
          stop = true;
          break;
        }
        ++report_.failures_processed;
        process_failure(failure, weak, strong, accepted, accepted_ids, rejected_ids);
      }
    }

    final_spec_ = update_prompt(base_template_, accepted, base_spec_.static_bindings,
                                base_spec_.placement);
    warn_on_prompt_growth();

    AccuracyReport cd_test = evaluate(ctx_, weak, final_spec_, test_, "cd:test");
    report_.cd_accuracy[weak.id]["test"] = cd_test.accuracy;

    report_.accepted_concepts = accepted;
    report_.calls_made = gateway_.total_calls();
    report_.generated_at_ms = now_ms();
    persist_outputs();
    return report_;
  }

  // Evaluates base and optimized prompt for each target handle on the test
  // split.  Target failures are isolated: a broken handle becomes a warning
  // row, not a run abort.
  std::map<std::string, TransferRow> transfer(const std::vector<std::string>& target_ids) {
    if (final_spec_.tmpl.user_text.empty()) {
      throw Error("transfer requires a completed or loaded run");
    }
    std::map<std::string, TransferRow> rows;
    if (target_ids.empty()) {
      report_.warnings.push_back("transfer requested with no targets");
    }
    for (const std::string& id : target_ids) {
      try {
        const ModelHandle& handle = cfg_.model(id);
        TransferRow row;
        row.base = evaluate(ctx_, handle, base_spec_, test_, "transfer:base:" + id).accuracy;
        row.cd = evaluate(ctx_, handle, final_spec_, test_, "transfer:cd:" + id).accuracy;
        row.delta = row.cd - row.base;
        rows[id] = row;
      } catch (const Error& e) {
        std::string w = "transfer target '" + id + "' failed: " + e.what();
        report_.warnings.push_back(w);
        ctx_.note(w);
      }
    }
    report_.transfer_matrix = rows;
    report_.calls_made = gateway_.total_calls();
    persist_outputs();
    return rows;
  }

  // Config recorded inside a completed run directory, with run_dir pinned
  // back to that directory.  Pair with load_saved_state():
  //   Runner r(Runner::saved_config(dir), /*resume_ledger=*/true);
  //   r.load_saved_state();
  static RunConfig saved_config(const std::filesystem::path& run_dir) {
    RunConfig cfg = load_run_config(run_dir / "config.json");
    cfg.run_dir = run_dir;
    return cfg;
  }

  // Reconstructs run state from the directory's artifacts: frozen template,
  // recorded split membership, optimized prompt spec, and the saved report.
  void load_saved_state() {
    if (cfg_.run_dir.empty()) throw ConfigError("load_saved_state needs a run directory");
    const std::filesystem::path& run_dir = cfg_.run_dir;
    base_template_ = load_template(run_dir / "base_prompt.tmpl");
    base_spec_ = make_base_spec();

    Dataset full = load_dataset(cfg_.dataset.path, cfg_.dataset.format);
    json splits;
    try {
      splits = json::parse(read_file(run_dir / "splits.json"));
    } catch (const json::exception& e) {
      throw ConfigError("splits.json: " + std::string(e.what()));
    }
    auto rebuild = [&](const char* name, SplitTag tag) {
      std::set<std::string> ids;
      for (const auto& v : splits.at(name)) ids.insert(v.get<std::string>());
      Dataset d;
      d.name = full.name + "-" + name;
      d.split = tag;
      for (const auto& ex : full.examples) {
        if (ids.count(ex.example_id)) d.examples.push_back(ex);
      }
      if (d.size() != ids.size()) {
        throw ConfigError("dataset no longer contains every recorded id for split " +
                          std::string(name));
      }
      return d;
    };
    train_ = rebuild("train", SplitTag::train);
    validation_ = rebuild("validation", SplitTag::validation);
    test_ = rebuild("test", SplitTag::test);

    final_spec_ = prompt_spec_from_json(json::parse(read_file(run_dir / "prompt_spec.json")));
    report_ = report_from_json(json::parse(read_file(run_dir / "report.json")));
  }

 private:
  RenderedPromptSpec make_base_spec() const {
    RenderedPromptSpec spec;
    spec.tmpl = base_template_;
    spec.static_bindings = cfg_.templates.bindings;
    if (!spec.static_bindings.count("task")) spec.static_bindings["task"] = cfg_.task_description;
    spec.placement = cfg_.templates.placement;
    return spec;
  }

  void load_inputs() {
    base_template_ = load_template(cfg_.templates.base_prompt);
    base_spec_ = make_base_spec();
    Dataset full = load_dataset(cfg_.dataset.path, cfg_.dataset.format);
    auto splits = split_dataset(full, cfg_.dataset.fractions, cfg_.dataset.seed);
    train_ = std::move(splits[0]);
    validation_ = std::move(splits[1]);
    test_ = std::move(splits[2]);
  }

  void persist_inputs() {
    if (!ctx_.persists()) return;
    ctx_.save_artifact("config.json", run_config_to_json(cfg_));
    write_file_atomic(cfg_.run_dir / "base_prompt.tmpl", read_file(cfg_.templates.base_prompt));
    auto ids = [](const Dataset& d) {
      std::vector<std::string> out;
      for (const auto& ex : d.examples) out.push_back(ex.example_id);
      return out;
    };
    ctx_.save_artifact("splits.json", json{{"train", ids(train_)},
                                           {"validation", ids(validation_)},
                                           {"test", ids(test_)},
                                           {"seed", cfg_.dataset.seed}});
  }

  void persist_outputs() {
    if (!ctx_.persists()) return;
    ctx_.save_artifact("report.json", report_to_json(report_));
    ctx_.save_artifact("prompt_spec.json", prompt_spec_to_json(final_spec_));
  }

  void budget_stop(const std::string& which, int limit) {
    report_.partial = true;
    std::string w = "budget " + which + " (" + std::to_string(limit) +
                    ") reached; remaining failures skipped";
    report_.warnings.push_back(w);
    ledger_.append("budget", json{{"limit", which}, {"value", limit}});
  }

  void warn_on_prompt_growth() {
    if (test_.empty()) return;
    Conversation conv = render(final_spec_, test_.examples.front());
    std::size_t chars = 0;
    for (const auto& m : conv) chars += m.content.size();
    std::size_t est_tokens = (chars + 3) / 4;  // rough chars-per-token heuristic
    if (est_tokens > static_cast<std::size_t>(cfg_.budget.warn_prompt_tokens)) {
      std::string w = "optimized prompt is ~" + std::to_string(est_tokens) +
                      " tokens (soft ceiling " + std::to_string(cfg_.budget.warn_prompt_tokens) +
                      "); consider pruning concepts";
      report_.warnings.push_back(w);
      ctx_.note(w);
    }
  }

  // One harvested failure through the induce/refine/verify loop, including
  // re-induction after rejections.  Failures are isolated: list-parse or
  // probe trouble skips this failure and the run moves on.
  void process_failure(const FailureRecord& failure, const ModelHandle& weak,
                       const ModelHandle& strong, std::vector<Concept>& accepted,
                       std::set<std::string>& accepted_ids, std::set<std::string>& rejected_ids) {
    const std::string prompt_text = base_prompt_text(base_spec_);

    ReasonList reasons;
    try {
      reasons = generate_reasons(ctx_, strong, failure, prompt_text, cfg_.induction.n_reasons);
    } catch (const ListParseError& e) {
      ctx_.note(std::string("skipping failure ") + failure.example_id + ": " + e.what());
      return;
    }

    std::optional<ProbeSet> probes;
    std::vector<std::string> avoid;
    for (int round = 0; round <= cfg_.verification.max_reinduction_rounds; ++round) {
      const std::string batch_ref = failure.example_id + "#r" + std::to_string(round);
      std::vector<Concept> induced;
      try {
        induced = induce_concepts(ctx_, strong, failure, reasons, prompt_text,
                                  cfg_.induction.n_concepts, batch_ref, avoid);
      } catch (const ListParseError& e) {
        ctx_.note(std::string("skipping failure ") + failure.example_id + ": " + e.what());
        return;
      }
      std::vector<Concept> refined = refine_concepts(ctx_, strong, induced, cfg_.task_description);

      std::vector<Concept> candidates;
      for (auto& c : refined) {
        if (accepted_ids.count(c.concept_id) || rejected_ids.count(c.concept_id)) continue;
        candidates.push_back(std::move(c));
      }
      if (candidates.empty()) {
        ctx_.note("failure " + failure.example_id + " round " + std::to_string(round) +
                  ": no concepts beyond ones already settled");
        return;
      }

      if (!probes) {
        try {
          probes = select_probes(ctx_, failure, validation_, strong, cfg_.verification);
        } catch (const InsufficientProbesError& e) {
          ctx_.note(std::string("skipping failure ") + failure.example_id + ": " + e.what());
          return;
        }
      }

      std::vector<std::vector<Concept>> batches;
      if (cfg_.verification.per_concept) {
        for (auto& c : candidates) batches.push_back({std::move(c)});
      } else {
        batches.push_back(std::move(candidates));
      }

      bool any_rejected = false;
      for (std::size_t b = 0; b < batches.size(); ++b) {
        std::string ref = batch_ref;
        if (cfg_.verification.per_concept) ref += "#c" + std::to_string(b);
        VerificationOutcome outcome =
            verify_concepts(ctx_, weak, base_spec_, accepted, batches[b], *probes,
                            cfg_.verification, round, ref);
        if (outcome.accepted) {
          for (auto& c : batches[b]) {
            accepted_ids.insert(c.concept_id);
            accepted.push_back(std::move(c));
          }
        } else {
          any_rejected = true;
          for (auto& c : batches[b]) {
            rejected_ids.insert(c.concept_id);
            avoid.push_back(c.text);
            ++report_.rejected_count;
          }
        }
      }
      if (!any_rejected) return;
    }
    ctx_.note("failure " + failure.example_id + ": re-induction budget exhausted with rejections");
  }

  RunConfig cfg_;
  RunLedger ledger_;
  Gateway gateway_;
  PipelineContext ctx_;
  PromptTemplate base_template_;
  RenderedPromptSpec base_spec_;
  RenderedPromptSpec final_spec_;
  Dataset train_, validation_, test_;
  RunReport report_;
};

// Convenience wrapper matching the one-shot library entry point.
inline RunReport run_cd(RunConfig cfg) {
  Runner runner(std::move(cfg));
  return runner.run();
}

}  // namespace cdist
