#pragma once

// Deduction-side quality control: refine induced concepts (dedupe +
// generality screen), assemble a probe set around each failure, and accept
// a concept batch only when the weak model's pass rate over the probes
// clears the threshold.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "cdist/concepts.hpp"
#include "cdist/context.hpp"
#include "cdist/evaluate.hpp"
#include "cdist/induction.hpp"
#include "cdist/item_list.hpp"
#include "cdist/protocol.hpp"

namespace cdist {

enum class ProbeSource { validation_similar, synthetic, mixed };

inline ProbeSource probe_source_from_name(std::string_view s) {
  if (s == "validation_similar") return ProbeSource::validation_similar;
  if (s == "synthetic") return ProbeSource::synthetic;
  if (s == "mixed") return ProbeSource::mixed;
  throw ConfigError("unknown probe_source: " + std::string(s));
}

inline const char* probe_source_name(ProbeSource s) {
  switch (s) {
    case ProbeSource::validation_similar: return "validation_similar";
    case ProbeSource::synthetic: return "synthetic";
    case ProbeSource::mixed: return "mixed";
  }
  return "validation_similar";
}

struct VerificationPolicy {
  double threshold = 0.80;  // accept iff pass_rate >= threshold (inclusive)
  int probe_count = 5;      // original failure + (probe_count - 1) others
  ProbeSource probe_source = ProbeSource::validation_similar;
  int max_reinduction_rounds = 2;
  bool per_concept = false;  // verify concepts one at a time instead of batched
};

enum class ProbeOrigin { original_failure, validation, synthetic };

inline const char* probe_origin_name(ProbeOrigin o) {
  switch (o) {
    case ProbeOrigin::original_failure: return "original_failure";
    case ProbeOrigin::validation: return "validation";
    case ProbeOrigin::synthetic: return "synthetic";
  }
  return "validation";
}

struct Probe {
  TaskExample example;
  ProbeOrigin origin = ProbeOrigin::validation;
  double similarity = 0.0;
};

struct ProbeSet {
  std::string failure_ref;
  std::vector<Probe> probes;  // probes[0] is always the original failure
};

// Word-token Jaccard similarity between two input texts.
inline double jaccard_similarity(std::string_view a, std::string_view b) {
  std::set<std::string> ta = word_tokens(a);
  std::set<std::string> tb = word_tokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : ta) inter += tb.count(t);
  std::size_t uni = ta.size() + tb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// --- refinement ---

namespace detail {

// Exact-duplicate merge by concept id: first occurrence keeps its text,
// provenance accumulates.
inline std::vector<Concept> merge_exact_duplicates(const std::vector<Concept>& in) {
  std::vector<Concept> out;
  for (const auto& c : in) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Concept& o) { return o.concept_id == c.concept_id; });
    if (it == out.end()) {
      out.push_back(c);
      continue;
    }
    for (const auto& p : c.provenance) {
      if (std::find(it->provenance.begin(), it->provenance.end(), p) == it->provenance.end()) {
        it->provenance.push_back(p);
      }
    }
  }
  return out;
}

// Provenance of a refined text: inherited from the input concept(s) with
// maximal token overlap, so rewordings stay traceable to their failures.
inline std::vector<std::string> provenance_for_refined(const std::string& refined_text,
                                                       const std::vector<Concept>& inputs) {
  double best = -1.0;
  for (const auto& c : inputs) best = std::max(best, jaccard_similarity(refined_text, c.text));
  std::vector<std::string> out;
  for (const auto& c : inputs) {
    if (jaccard_similarity(refined_text, c.text) < best - 1e-12) continue;
    for (const auto& p : c.provenance) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

}  // namespace detail

// Collapses duplicates locally, then has the strong model screen the batch
// for generality.  Refinement is a contraction: it never outputs more
// concepts than it was given.  If the model twice fails to produce a list,
// the locally merged batch passes through unrefined (flagged in the
// ledger) rather than losing the failure's concepts entirely.
inline std::vector<Concept> refine_concepts(PipelineContext& ctx, const ModelHandle& strong,
                                            const std::vector<Concept>& induced,
                                            const std::string& task_description) {
  if (induced.empty()) throw Error("refine_concepts: empty input batch");
  for (const auto& c : induced) {
    if (c.status != ConceptStatus::induced) {
      throw Error("refine_concepts: concept '" + c.text + "' is not in induced state");
    }
  }
  std::vector<Concept> merged = detail::merge_exact_duplicates(induced);
  std::vector<std::string> texts;
  for (const auto& c : merged) texts.push_back(c.text);

  Conversation conv = concept_refine_messages(texts, task_description);
  std::string raw;
  bool reprompted = false;
  std::vector<std::string> items = detail::complete_item_list(ctx, strong, conv, &raw, &reprompted);

  std::vector<Concept> out;
  if (items.empty()) {
    ctx.note("refine fallback: model returned no parseable list twice; keeping locally merged "
             "batch");
    out = merged;
    for (auto& c : out) c.status = ConceptStatus::refined;
  } else {
    if (items.size() > merged.size()) {
      ctx.note("refine returned more items than inputs; truncating to input count");
      items.resize(merged.size());
    }
    for (const auto& text : items) {
      Concept c;
      c.text = text;
      c.concept_id = concept_id_for(text);
      c.status = ConceptStatus::refined;
      c.provenance = detail::provenance_for_refined(text, merged);
      c.batch_ref = merged.front().batch_ref;
      out.push_back(std::move(c));
    }
    // The model screen can also merge duplicates it was handed; collapse
    // any id collisions it left behind.
    out = detail::merge_exact_duplicates(out);
  }

  for (const auto& c : out) ctx.log_concept(c);
  ctx.save_artifact(std::filesystem::path("induction") / (merged.front().batch_ref + "-refine.json"),
                    json{{"conversation", conversation_to_json(conv)},
                         {"response", raw},
                         {"kept", items},
                         {"fallback", items.empty()}});
  return out;
}

// --- probe selection ---

namespace detail {

inline std::vector<Probe> validation_probes(const FailureRecord& failure, const Dataset& validation,
                                            std::size_t want) {
  struct Scored {
    double sim;
    const TaskExample* ex;
  };
  std::vector<Scored> scored;
  for (const auto& ex : validation.examples) {
    scored.push_back({jaccard_similarity(failure.input, ex.input), &ex});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.ex->example_id < b.ex->example_id;  // deterministic tie-break
  });
  std::vector<Probe> out;
  for (const auto& s : scored) {
    if (out.size() >= want) break;
    out.push_back(Probe{*s.ex, ProbeOrigin::validation, s.sim});
  }
  return out;
}

// Parses "Q: <problem> ||| A: <answer>" lines, tolerating list markers.
inline std::vector<std::pair<std::string, std::string>> parse_probe_lines(const std::string& raw) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    auto sep = line.find("|||");
    if (sep == std::string::npos) continue;
    std::string left = trim(line.substr(0, sep));
    std::string right = trim(line.substr(sep + 3));
    std::size_t m = list_marker_len(left);
    if (m > 0) left = trim(left.substr(m));
    auto strip_label = [](std::string s, std::string_view label) {
      if (casefold(s).rfind(std::string(label), 0) == 0) return trim(s.substr(label.size()));
      return s;
    };
    left = strip_label(left, "q:");
    right = strip_label(right, "a:");
    if (!left.empty() && !right.empty()) out.emplace_back(left, right);
  }
  return out;
}

// Self-consistency screen for an invented probe: its stated answer must be
// usable by the judge (numeric parses, code tests at least compile).
inline std::optional<TaskExample> build_synthetic_probe(PipelineContext& ctx,
                                                        const FailureRecord& failure,
                                                        const std::string& question,
                                                        const std::string& answer, int index) {
  TaskExample ex;
  ex.example_id = failure.example_id + "#syn" + std::to_string(index);
  ex.input = question;
  switch (failure.ground_truth.kind) {
    case GroundTruthKind::numeric: {
      auto v = parse_number(trim(answer));
      if (!v) return std::nullopt;
      ex.ground_truth = GroundTruth::number(*v);
      return ex;
    }
    case GroundTruthKind::exact_text:
      ex.ground_truth = GroundTruth::text(answer);
      return ex;
    case GroundTruthKind::code_tests: {
      SandboxConfig compile_cfg = ctx.judge_policy.sandbox;
      compile_cfg.timeout_ms = std::min(compile_cfg.timeout_ms, 5000);
      std::string check = "import ast\nast.parse(r'''\n" + answer + "\n''')\n";
      SandboxResult res;
      {
        Limiter::Guard g(*ctx.judge_policy.sandbox_limiter);
        res = run_sandboxed(compile_cfg, check);
      }
      if (res.exit_code != 0) return std::nullopt;
      ex.ground_truth = GroundTruth::code(answer, failure.ground_truth.entry_point);
      return ex;
    }
  }
  return std::nullopt;
}

inline std::vector<Probe> synthetic_probes(PipelineContext& ctx, const ModelHandle& strong,
                                           const FailureRecord& failure, std::size_t want) {
  if (want == 0) return {};
  Conversation conv = probe_synthesis_messages(
      failure.input, ground_truth_display(failure.ground_truth), static_cast<int>(want));
  std::string raw = ctx.gateway->complete(strong, conv);
  std::vector<Probe> out;
  int index = 0;
  for (const auto& [q, a] : parse_probe_lines(raw)) {
    if (out.size() >= want) break;
    auto ex = build_synthetic_probe(ctx, failure, q, a, index++);
    if (!ex) {
      ctx.note("discarded synthetic probe for " + failure.example_id +
               " (answer failed self-consistency)");
      continue;
    }
    out.push_back(Probe{std::move(*ex), ProbeOrigin::synthetic,
                        jaccard_similarity(failure.input, q)});
  }
  return out;
}

}  // namespace detail

// Assembles the probe set for one failure.  The original failing example
// always leads; companions come from the validation split (ranked by
// Jaccard similarity), from synthesized look-alikes, or an even mix
// (rounding toward validation).  Fewer than two usable probes in total is
// an InsufficientProbesError — a one-example gate would be meaningless.
inline ProbeSet select_probes(PipelineContext& ctx, const FailureRecord& failure,
                              const Dataset& validation, const ModelHandle& strong,
                              const VerificationPolicy& policy) {
  ProbeSet set;
  set.failure_ref = failure.example_id;
  TaskExample original{failure.example_id, failure.input, failure.ground_truth, ""};
  set.probes.push_back(Probe{std::move(original), ProbeOrigin::original_failure, 1.0});

  std::size_t want = policy.probe_count > 1 ? static_cast<std::size_t>(policy.probe_count - 1) : 0;
  std::vector<Probe> extra;
  switch (policy.probe_source) {
    case ProbeSource::validation_similar:
      extra = detail::validation_probes(failure, validation, want);
      break;
    case ProbeSource::synthetic:
      extra = detail::synthetic_probes(ctx, strong, failure, want);
      break;
    case ProbeSource::mixed: {
      std::size_t val_want = (want + 1) / 2;  // rounds toward validation
      extra = detail::validation_probes(failure, validation, val_want);
      std::vector<Probe> syn =
          detail::synthetic_probes(ctx, strong, failure, want - extra.size());
      extra.insert(extra.end(), syn.begin(), syn.end());
      break;
    }
  }
  for (auto& p : extra) set.probes.push_back(std::move(p));

  if (set.probes.size() < 2) {
    throw InsufficientProbesError("failure " + failure.example_id + ": only " +
                                  std::to_string(set.probes.size()) +
                                  " usable probe(s); need at least 2");
  }
  return set;
}

// --- the gate ---

struct VerificationOutcome {
  std::string batch_ref;
  std::string failure_ref;
  double pass_rate = 0.0;
  bool accepted = false;
  int round = 0;
  int errors_excluded = 0;
  std::vector<std::pair<std::string, Verdict>> per_probe;
};

inline json verification_outcome_to_json(const VerificationOutcome& o) {
  json per = json::array();
  for (const auto& [id, v] : o.per_probe) per.push_back(json{{"id", id}, {"verdict", verdict_name(v)}});
  return json{{"batch_ref", o.batch_ref},   {"failure_ref", o.failure_ref},
              {"pass_rate", o.pass_rate},   {"accepted", o.accepted},
              {"round", o.round},           {"errors_excluded", o.errors_excluded},
              {"per_probe", per}};
}

// Tests a candidate batch on the probe set: the weak model answers every
// probe with base prompt + already-accepted concepts + candidates, and the
// batch is accepted iff the pass rate clears the threshold (>=, so 4/5
// passes an 0.8 bar).  Probes whose judgement errors out are excluded from
// the denominator and flagged.  Statuses and ledger transitions happen
// here, atomically for the whole batch.
inline VerificationOutcome verify_concepts(PipelineContext& ctx, const ModelHandle& weak,
                                           const RenderedPromptSpec& base_spec,
                                           const std::vector<Concept>& already_accepted,
                                           std::vector<Concept>& candidates, const ProbeSet& probes,
                                           const VerificationPolicy& policy, int round,
                                           const std::string& batch_ref) {
  if (candidates.empty()) throw Error("verify_concepts: empty candidate batch");
  for (const auto& c : candidates) {
    if (c.status != ConceptStatus::refined) {
      throw Error("verify_concepts: concept '" + c.text + "' is not in refined state");
    }
  }
  if (probes.probes.size() < 2) {
    throw InsufficientProbesError("verification needs at least 2 probes");
  }

  RenderedPromptSpec test_spec = base_spec;
  test_spec.concepts = already_accepted;
  test_spec.concepts.insert(test_spec.concepts.end(), candidates.begin(), candidates.end());

  std::vector<Judgement> judgements(probes.probes.size());
  std::vector<CallRecord> calls(probes.probes.size());
  parallel_for(probes.probes.size(), ctx.parallelism, [&](std::size_t i) {
    const TaskExample& ex = probes.probes[i].example;
    calls[i] = ctx.gateway->invoke(weak, render(test_spec, ex));
    judgements[i] = judge(ex, calls[i].response, ctx.judge_policy);
  });

  VerificationOutcome outcome;
  outcome.batch_ref = batch_ref;
  outcome.failure_ref = probes.failure_ref;
  outcome.round = round;
  std::size_t usable = 0, passed = 0;
  for (std::size_t i = 0; i < probes.probes.size(); ++i) {
    ctx.gateway->log_call(calls[i]);
    const std::string& pid = probes.probes[i].example.example_id;
    if (ctx.ledger) {
      json j = judgement_to_json(judgements[i]);
      j["example_id"] = pid;
      j["phase"] = "probe:" + batch_ref;
      ctx.ledger->append("judgement", std::move(j));
    }
    outcome.per_probe.emplace_back(pid, judgements[i].verdict);
    if (judgements[i].verdict == Verdict::error) {
      ++outcome.errors_excluded;
      continue;
    }
    ++usable;
    if (judgements[i].verdict == Verdict::correct) ++passed;
  }
  if (outcome.errors_excluded > 0) {
    ctx.note("verification " + batch_ref + ": excluded " +
             std::to_string(outcome.errors_excluded) + " probe(s) with error verdicts");
  }
  outcome.pass_rate =
      usable == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(usable);
  outcome.accepted = outcome.pass_rate >= policy.threshold;

  ConceptStatus next = outcome.accepted ? ConceptStatus::accepted : ConceptStatus::rejected;
  for (auto& c : candidates) {
    c.status = next;
    c.verification = ConceptVerification{outcome.pass_rate, outcome.accepted, round};
    ctx.log_concept(c, json{{"pass_rate", outcome.pass_rate}, {"round", round}});
  }
  if (ctx.ledger) ctx.ledger->append("verification", verification_outcome_to_json(outcome));
  ctx.save_artifact(std::filesystem::path("verification") / (batch_ref + ".json"),
                    verification_outcome_to_json(outcome));
  return outcome;
}

}  // namespace cdist
