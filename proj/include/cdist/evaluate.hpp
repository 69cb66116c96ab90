#pragma once

// Accuracy measurement of one model x prompt x dataset.  Calls run in
// parallel, but ledger events land in dataset order so two runs over the
// same inputs produce identical event sequences.

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "cdist/context.hpp"
#include "cdist/errors.hpp"
#include "cdist/judge.hpp"
#include "cdist/prompting.hpp"
#include "cdist/tasks.hpp"

namespace cdist {

struct AccuracyReport {
  std::string model_id;
  std::string phase;  // e.g. "base:test", "cd:test", "harvest:train"
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t errors = 0;  // judge-side failures; counted as not-correct
  double accuracy = 0.0;
  std::vector<std::pair<std::string, Verdict>> per_example;
};

inline json accuracy_report_to_json(const AccuracyReport& r) {
  json per = json::array();
  for (const auto& [id, v] : r.per_example) per.push_back(json{{"id", id}, {"verdict", verdict_name(v)}});
  return json{{"model_id", r.model_id}, {"phase", r.phase},       {"total", r.total},
              {"correct", r.correct},   {"errors", r.errors},     {"accuracy", r.accuracy},
              {"per_example", per}};
}

struct EvaluatedExample {
  CallRecord call;
  Judgement judgement;
};

// Runs the model over every example and judges each response.  Judge-error
// verdicts count against accuracy (the model did not demonstrably solve the
// example) but are tallied separately in `errors`.
inline AccuracyReport evaluate_with_records(PipelineContext& ctx, const ModelHandle& handle,
                                            const RenderedPromptSpec& spec, const Dataset& data,
                                            const std::string& phase,
                                            std::vector<EvaluatedExample>* out_records = nullptr) {
  if (data.empty()) throw EmptyDatasetError("evaluate: dataset '" + data.name + "' is empty");

  std::vector<EvaluatedExample> rows(data.size());
  parallel_for(data.size(), ctx.parallelism, [&](std::size_t i) {
    const TaskExample& ex = data.examples[i];
    rows[i].call = ctx.gateway->invoke(handle, render(spec, ex));
    rows[i].judgement = judge(ex, rows[i].call.response, ctx.judge_policy);
  });

  AccuracyReport report;
  report.model_id = handle.id;
  report.phase = phase;
  report.total = data.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const TaskExample& ex = data.examples[i];
    ctx.gateway->log_call(rows[i].call);
    if (ctx.ledger) {
      json j = judgement_to_json(rows[i].judgement);
      j["example_id"] = ex.example_id;
      j["phase"] = phase;
      ctx.ledger->append("judgement", std::move(j));
    }
    if (rows[i].judgement.verdict == Verdict::correct) ++report.correct;
    if (rows[i].judgement.verdict == Verdict::error) ++report.errors;
    report.per_example.emplace_back(ex.example_id, rows[i].judgement.verdict);
  }
  report.accuracy =
      report.total == 0 ? 0.0 : static_cast<double>(report.correct) / static_cast<double>(report.total);
  if (ctx.ledger) ctx.ledger->append("accuracy", accuracy_report_to_json(report));
  if (out_records) *out_records = std::move(rows);
  return report;
}

inline AccuracyReport evaluate(PipelineContext& ctx, const ModelHandle& handle,
                               const RenderedPromptSpec& spec, const Dataset& data,
                               const std::string& phase) {
  return evaluate_with_records(ctx, handle, spec, data, phase, nullptr);
}

}  // namespace cdist
