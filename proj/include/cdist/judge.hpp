#pragma once

// Ground-truth judging of raw model output.  The judge is total: malformed
// text yields an incorrect verdict and environment trouble yields an error
// verdict, but judge() itself never throws.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdist/numeric.hpp"
#include "cdist/sandbox.hpp"
#include "cdist/tasks.hpp"
#include "cdist/util.hpp"

namespace cdist {

enum class Verdict { correct, incorrect, error };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
    case Verdict::error: return "error";
  }
  return "error";
}

struct Judgement {
  Verdict verdict = Verdict::error;
  std::optional<std::string> extracted_answer;
  std::string detail;

  bool operator==(const Judgement&) const = default;
};

struct JudgePolicy {
  double numeric_abs_tol = 1e-6;
  std::vector<std::string> answer_markers = {"####", "answer:"};
  SandboxConfig sandbox;
  // Global brake on concurrent sandboxed executions; shared across copies.
  std::shared_ptr<Limiter> sandbox_limiter = std::make_shared<Limiter>(2);
};

// Final-answer extraction, in order of precedence:
//   1. the first number token after the last occurrence of any marker
//      (markers matched case-insensitively),
//   2. otherwise the last number token anywhere in the output.
inline std::optional<std::string> extract_final_answer(const std::string& output,
                                                       const std::vector<std::string>& markers) {
  const std::string folded = casefold(output);
  std::size_t best = std::string::npos;  // position just after the winning marker
  for (const auto& marker : markers) {
    if (marker.empty()) continue;
    std::string m = casefold(marker);
    std::size_t pos = folded.rfind(m);
    if (pos == std::string::npos) continue;
    std::size_t after = pos + m.size();
    if (best == std::string::npos || after > best) best = after;
  }
  if (best != std::string::npos) {
    auto tail_tokens = find_number_tokens(std::string_view(output).substr(best));
    if (!tail_tokens.empty()) return tail_tokens.front();
  }
  auto tokens = find_number_tokens(output);
  if (!tokens.empty()) return tokens.back();
  return std::nullopt;
}

// First fenced code block (``` with optional language tag); whole output
// when nothing is fenced.
inline std::string extract_code_block(const std::string& output) {
  std::size_t open = output.find("```");
  if (open == std::string::npos) return output;
  std::size_t body_start = output.find('\n', open + 3);
  if (body_start == std::string::npos) return output;
  ++body_start;
  std::size_t close = output.find("```", body_start);
  if (close == std::string::npos) return output.substr(body_start);
  return output.substr(body_start, close - body_start);
}

namespace detail {

inline Judgement judge_numeric(const GroundTruth& truth, const std::string& output,
                               const JudgePolicy& policy) {
  auto token = extract_final_answer(output, policy.answer_markers);
  if (!token) {
    return Judgement{Verdict::incorrect, std::nullopt, "no numeric answer found in output"};
  }
  auto value = parse_number(*token);
  if (!value) {
    return Judgement{Verdict::incorrect, *token, "unparseable numeric token '" + *token + "'"};
  }
  std::string normalized = normalize_number_token(*token);
  if (std::fabs(*value - truth.numeric_value) <= policy.numeric_abs_tol) {
    return Judgement{Verdict::correct, normalized, "matched expected value"};
  }
  return Judgement{Verdict::incorrect, normalized,
                   "expected " + format_double(truth.numeric_value) + ", got " + normalized};
}

inline Judgement judge_exact_text(const GroundTruth& truth, const std::string& output) {
  std::string got = normalize_text(output);
  std::string want = normalize_text(truth.canonical_text);
  if (got == want) return Judgement{Verdict::correct, got, "exact match after normalization"};
  return Judgement{Verdict::incorrect, got, "text mismatch"};
}

inline Judgement judge_code(const GroundTruth& truth, const std::string& output,
                            const JudgePolicy& policy) {
  if (policy.sandbox.runner.empty()) {
    return Judgement{Verdict::error, std::nullopt, "no sandbox runner configured"};
  }
  std::string code = extract_code_block(output);
  std::string program = code;
  program += "\n\n";
  program += truth.test_suite;
  program += "\n";
  // HumanEval-style suites define check(candidate); drive them explicitly.
  if (!truth.entry_point.empty() && truth.test_suite.find("def check(") != std::string::npos) {
    program += "\ncheck(" + truth.entry_point + ")\n";
  }
  SandboxResult res;
  {
    Limiter::Guard g(*policy.sandbox_limiter);
    res = run_sandboxed(policy.sandbox, program);
  }
  if (res.spawn_failed) {
    return Judgement{Verdict::error, std::nullopt, "sandbox spawn failed: " + res.stderr_text};
  }
  if (res.timed_out) {
    return Judgement{Verdict::error, std::nullopt,
                     "execution exceeded " + std::to_string(policy.sandbox.timeout_ms) + "ms"};
  }
  if (res.exit_code == 0) {
    return Judgement{Verdict::correct, std::nullopt, "all tests passed"};
  }
  std::string tail = trim(res.stderr_text);
  if (tail.size() > 400) tail = "..." + tail.substr(tail.size() - 400);
  return Judgement{Verdict::incorrect, std::nullopt,
                   "tests failed (exit " + std::to_string(res.exit_code) + "): " + tail};
}

}  // namespace detail

inline Judgement judge(const TaskExample& example, const std::string& model_output,
                       const JudgePolicy& policy) {
  try {
    switch (example.ground_truth.kind) {
      case GroundTruthKind::numeric:
        return detail::judge_numeric(example.ground_truth, model_output, policy);
      case GroundTruthKind::exact_text:
        return detail::judge_exact_text(example.ground_truth, model_output);
      case GroundTruthKind::code_tests:
        return detail::judge_code(example.ground_truth, model_output, policy);
    }
    return Judgement{Verdict::error, std::nullopt, "unknown ground truth kind"};
  } catch (const std::exception& e) {
    return Judgement{Verdict::error, std::nullopt, std::string("judge failure: ") + e.what()};
  }
}

inline json judgement_to_json(const Judgement& j) {
  json out{{"verdict", verdict_name(j.verdict)}, {"detail", j.detail}};
  if (j.extracted_answer) out["extracted_answer"] = *j.extracted_answer;
  return out;
}

}  // namespace cdist
