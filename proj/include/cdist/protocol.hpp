#pragma once

// The fixed meta-prompts driving the improvement loop: failure analysis,
// concept induction, concept refinement, and probe synthesis.  Structure
// and wording are pinned — tests assert on these byte for byte — because
// cache keys and replay identity depend on them.

#include <map>
#include <string>
#include <vector>

#include "cdist/item_list.hpp"
#include "cdist/message.hpp"
#include "cdist/prompting.hpp"

namespace cdist {

// --- failure analysis (strong model explains why the weak output missed) ---

inline constexpr std::string_view kFailureReasonSystem =
    "You are a skilled evaluator that can analyze instruction prompts and generated responses to "
    "identify issues. For context, you will be given a task, an instruction prompt used to "
    "complete that task, a response to the task, and the ground truth expected response. Your "
    "task is to identify reasons why the response failed to meet the ground truth.";

inline constexpr std::string_view kFailureReasonUser =
    "The original task is: {original_task}\n"
    "The instruction prompt used was: {instruction_prompt}\n"
    "The response generated based on the prompt is: {generated_response}\n"
    "An example of a correct ground truth is: {ground_truth}\n"
    "The evaluation result was: {evaluation_result}\n"
    "\n"
    "Based on the evaluation result and the provided example ground truth, can you identify a "
    "list of {n} reasons why the generated response failed?";

inline Conversation failure_reason_messages(const std::string& original_task,
                                            const std::string& instruction_prompt,
                                            const std::string& generated_response,
                                            const std::string& ground_truth,
                                            const std::string& evaluation_result, int n) {
  std::map<std::string, std::string> b{{"original_task", original_task},
                                       {"instruction_prompt", instruction_prompt},
                                       {"generated_response", generated_response},
                                       {"ground_truth", ground_truth},
                                       {"evaluation_result", evaluation_result},
                                       {"n", std::to_string(n)}};
  return {{Role::system, std::string(kFailureReasonSystem)},
          {Role::user, substitute(kFailureReasonUser, b)}};
}

// --- concept induction (failure reasons -> general corrective instructions) ---

inline constexpr std::string_view kConceptInductionSystem =
    "You are a helpful assistant that can analyze instruction prompts and identify high-level, "
    "generalizable concepts that can be added to the prompt to ensure the task is completed "
    "successfully. A concept is a general instruction derived or inferred from specific "
    "instances or occurrences. Concepts should be general enough to be applicable to a wide "
    "range of tasks.";

inline constexpr std::string_view kConceptInductionUser =
    "- The original instruction prompt was: {original_prompt}\n"
    "- The response was: {generated_response}\n"
    "- The ground truth expected response was: {ground_truth}\n"
    "- Reasons for the failure include: {failure_reasons_step_1}\n"
    "\n"
    "Can you identify a list of {n} concepts that can be added to the prompt to ensure the task "
    "as well as related ones passes?";

inline Conversation concept_induction_messages(const std::string& original_prompt,
                                               const std::string& generated_response,
                                               const std::string& ground_truth,
                                               const std::vector<std::string>& failure_reasons,
                                               int n,
                                               const std::vector<std::string>& avoid_texts = {}) {
  std::map<std::string, std::string> b{
      {"original_prompt", original_prompt},
      {"generated_response", generated_response},
      {"ground_truth", ground_truth},
      {"failure_reasons_step_1", "\n" + render_item_list(failure_reasons, "n.")},
      {"n", std::to_string(n)}};
  std::string user = substitute(kConceptInductionUser, b);
  if (!avoid_texts.empty()) {
    // Re-induction after a rejection: steer away from what already failed
    // verification.  Changing the user text changes the cache key, so the
    // retry is a genuinely fresh call.
    user += "\n\nThe following concepts were already tried and rejected by validation; propose "
            "different ones:\n";
    user += render_item_list(avoid_texts, "- ");
  }
  return {{Role::system, std::string(kConceptInductionSystem)}, {Role::user, user}};
}

// --- concept refinement (dedupe + generality screen) ---

inline constexpr std::string_view kConceptRefineSystem =
    "You are an intelligent assistant that processes a list of high-level, generalizable "
    "concepts for a given task. Your task is twofold:\n"
    "1. Analyze the list of concepts and remove semantically similar duplicates, ensuring that "
    "each remaining concept is unique and distinct.\n"
    "2. Verify that each concept is general enough to be valid for improving the given task. A "
    "valid concept should:\n"
    "- Be generalizable to similar examples within the task.\n"
    "- Directly address weaknesses or improve performance for the task.\n"
    "A concept is defined as a general instruction derived or inferred from specific instances "
    "or occurrences of a task. Your goal is to preserve the clearest, most concise, and "
    "generalizable version of each valid concept.";

inline constexpr std::string_view kConceptRefineUser =
    "Here is the list of concepts generated for the task: {concepts}\n"
    "The original task is: {original_task}\n"
    "\n"
    "Please return a list of unique, valid concepts. Your output should only include the "
    "refined concepts without any additional explanations or preambles.";

inline Conversation concept_refine_messages(const std::vector<std::string>& concept_texts,
                                            const std::string& original_task) {
  std::map<std::string, std::string> b{{"concepts", "\n" + render_item_list(concept_texts, "- ")},
                                       {"original_task", original_task}};
  return {{Role::system, std::string(kConceptRefineSystem)},
          {Role::user, substitute(kConceptRefineUser, b)}};
}

// --- probe synthesis (strong model invents extra verification inputs) ---

inline constexpr std::string_view kProbeSynthesisSystem =
    "You are a helpful assistant that writes new practice problems similar to a given one. Each "
    "problem must be self-contained and must come with its expected answer.";

inline constexpr std::string_view kProbeSynthesisUser =
    "Here is an example problem:\n{original_task}\n\n"
    "Its expected answer is:\n{ground_truth}\n\n"
    "Write {n} new problems of the same kind, each testing the same underlying skill. Reply "
    "with one problem per line, formatted exactly as:\n"
    "Q: <problem> ||| A: <expected answer>";

inline Conversation probe_synthesis_messages(const std::string& original_task,
                                             const std::string& ground_truth, int n) {
  std::map<std::string, std::string> b{{"original_task", original_task},
                                       {"ground_truth", ground_truth},
                                       {"n", std::to_string(n)}};
  return {{Role::system, std::string(kProbeSynthesisSystem)},
          {Role::user, substitute(kProbeSynthesisUser, b)}};
}

// --- default task template for the model under improvement ---

inline constexpr std::string_view kDefaultTaskSystem =
    "You are a helpful assistant that performs {task}. Follow the given instructions to "
    "complete the task successfully.";

inline constexpr std::string_view kDefaultTaskUser = "Instructions: {initial_prompt}\n\n{question}";

inline PromptTemplate default_task_template() {
  return PromptTemplate::make("default_task", std::string(kDefaultTaskSystem),
                              std::string(kDefaultTaskUser));
}

}  // namespace cdist
