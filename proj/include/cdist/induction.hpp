#pragma once

// The harvest -> explain -> induce stages: collect weak-model failures
// against ground truth, have the strong model articulate why each response
// failed, then turn those reasons into candidate corrective concepts.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "cdist/concepts.hpp"
#include "cdist/context.hpp"
#include "cdist/evaluate.hpp"
#include "cdist/item_list.hpp"
#include "cdist/protocol.hpp"

namespace cdist {

// One harvested failure, frozen with everything later stages need: the
// exact weak output, the judgement, and the digest of the prompt spec in
// force when it happened.
struct FailureRecord {
  std::string example_id;
  std::string input;
  GroundTruth ground_truth;
  std::string weak_output;
  Judgement judgement;
  std::string prompt_spec_digest;
};

inline json failure_record_to_json(const FailureRecord& f) {
  return json{{"example_id", f.example_id},
              {"input", f.input},
              {"ground_truth_kind", ground_truth_kind_name(f.ground_truth.kind)},
              {"weak_output", f.weak_output},
              {"judgement", judgement_to_json(f.judgement)},
              {"prompt_spec_digest", f.prompt_spec_digest}};
}

struct HarvestResult {
  std::vector<FailureRecord> failures;  // dataset order
  AccuracyReport accuracy;
};

// Evaluates the weak model on the training split and keeps every example
// judged incorrect.  Error verdicts (sandbox trouble, judge failure) are
// not harvestable — there is no trustworthy wrong answer to analyze — so
// they are flagged and skipped.
inline HarvestResult harvest_failures(PipelineContext& ctx, const ModelHandle& weak,
                                      const RenderedPromptSpec& spec, const Dataset& train) {
  std::vector<EvaluatedExample> rows;
  HarvestResult result;
  result.accuracy = evaluate_with_records(ctx, weak, spec, train, "harvest:train", &rows);
  const std::string spec_digest = prompt_spec_digest(spec);

  for (std::size_t i = 0; i < train.size(); ++i) {
    const TaskExample& ex = train.examples[i];
    const Judgement& jd = rows[i].judgement;
    if (jd.verdict == Verdict::error) {
      if (ctx.ledger) {
        ctx.ledger->append("failure", json{{"example_id", ex.example_id},
                                           {"harvested", false},
                                           {"reason", "judge error: " + jd.detail}});
      }
      continue;
    }
    if (jd.verdict != Verdict::incorrect) continue;
    FailureRecord f;
    f.example_id = ex.example_id;
    f.input = ex.input;
    f.ground_truth = ex.ground_truth;
    f.weak_output = rows[i].call.response;
    f.judgement = jd;
    f.prompt_spec_digest = spec_digest;
    if (ctx.ledger) {
      json j = failure_record_to_json(f);
      j["harvested"] = true;
      ctx.ledger->append("failure", std::move(j));
    }
    result.failures.push_back(std::move(f));
  }
  return result;
}

struct ReasonList {
  std::string failure_ref;  // example id of the failure analyzed
  std::vector<std::string> reasons;
  std::string raw_response;
};

namespace detail {

// One retry with an explicit format reminder before giving up on a
// response that contained no parseable list.
inline std::vector<std::string> complete_item_list(PipelineContext& ctx, const ModelHandle& model,
                                                   Conversation conv, std::string* raw_out,
                                                   bool* reprompted_out) {
  std::string raw = ctx.gateway->complete(model, conv);
  std::vector<std::string> items = parse_item_list(raw);
  if (reprompted_out) *reprompted_out = false;
  if (items.empty()) {
    conv.back().content +=
        "\n\nFormat reminder: reply with a plain list, one item per line, each line starting "
        "with \"- \".";
    raw = ctx.gateway->complete(model, conv);
    items = parse_item_list(raw);
    if (reprompted_out) *reprompted_out = true;
  }
  if (raw_out) *raw_out = raw;
  return items;
}

inline std::vector<std::string> truncate_items(PipelineContext& ctx, std::vector<std::string> items,
                                               std::size_t limit, const std::string& what) {
  if (items.size() > limit) {
    ctx.note(what + ": model returned " + std::to_string(items.size()) + " items, keeping first " +
             std::to_string(limit));
    items.resize(limit);
  }
  return items;
}

}  // namespace detail

// Asks the strong model why one harvested failure happened.  Throws
// ListParseError when even the reprompt yields no list; callers skip the
// failure and move on.
inline ReasonList generate_reasons(PipelineContext& ctx, const ModelHandle& strong,
                                   const FailureRecord& failure, const std::string& prompt_text,
                                   int n_reasons) {
  Conversation conv =
      failure_reason_messages(failure.input, prompt_text, failure.weak_output,
                              ground_truth_display(failure.ground_truth),
                              failure.judgement.detail, n_reasons);
  std::string raw;
  bool reprompted = false;
  auto items = detail::complete_item_list(ctx, strong, conv, &raw, &reprompted);
  if (items.empty()) {
    throw ListParseError("no failure reasons parseable for example " + failure.example_id);
  }
  items = detail::truncate_items(ctx, std::move(items), static_cast<std::size_t>(n_reasons),
                                 "reasons for " + failure.example_id);
  ctx.save_artifact(std::filesystem::path("induction") / failure.example_id / "reasons.json",
                    json{{"conversation", conversation_to_json(conv)},
                         {"response", raw},
                         {"items", items},
                         {"reprompted", reprompted}});
  return ReasonList{failure.example_id, items, raw};
}

// Turns failure reasons into candidate concepts (status=induced).  A non-
// empty avoid list marks a re-induction round after a verification
// rejection.
inline std::vector<Concept> induce_concepts(PipelineContext& ctx, const ModelHandle& strong,
                                            const FailureRecord& failure, const ReasonList& reasons,
                                            const std::string& prompt_text, int n_concepts,
                                            const std::string& batch_ref,
                                            const std::vector<std::string>& avoid_texts = {}) {
  Conversation conv = concept_induction_messages(prompt_text, failure.weak_output,
                                                 ground_truth_display(failure.ground_truth),
                                                 reasons.reasons, n_concepts, avoid_texts);
  std::string raw;
  bool reprompted = false;
  auto items = detail::complete_item_list(ctx, strong, conv, &raw, &reprompted);
  if (items.empty()) {
    throw ListParseError("no concepts parseable for example " + failure.example_id);
  }
  items = detail::truncate_items(ctx, std::move(items), static_cast<std::size_t>(n_concepts),
                                 "concepts for " + failure.example_id);

  ctx.save_artifact(std::filesystem::path("induction") / failure.example_id /
                        (batch_ref + "-concepts.json"),
                    json{{"conversation", conversation_to_json(conv)},
                         {"response", raw},
                         {"items", items},
                         {"reprompted", reprompted}});
  std::vector<Concept> out;
  for (auto& text : items) {
    Concept c = Concept::induced_from(std::move(text), {failure.example_id}, batch_ref);
    ctx.log_concept(c);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace cdist
