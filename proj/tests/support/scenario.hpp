#pragma once

// Scripted end-to-end scenarios shared by the orchestrator tests and the
// acceptance suite.  Both build a complete run on mock fixtures whose
// outcome is known in advance, so every pipeline stage can be checked
// against hand-computed numbers.

#include <cdist/cdist.hpp>

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using cdist::json;

inline json substring_rule(const std::string& needle, const std::string& response) {
  return json{{"match", json{{"substring", needle}}}, {"response", response}};
}

// ---------------------------------------------------------------------------
// The "tank capacity" lift scenario.
//
// 50 math word problems in two strata:
//   alpha (15): tank-capacity questions, answer always 100.  The weak mock
//     answers them wrong ("Answer: 7") unless the corrective concept text
//     appears somewhere in its prompt, in which case it answers 100.
//   beta (35): unique easy additions the weak mock always gets right via
//     one exact-question rule each.
//
// With fractions 0.6/0.2/0.2 the stratified split is exact regardless of
// seed: alpha (9, 3, 3), beta (21, 7, 7).  So the test split holds 3 alpha
// + 7 beta examples, base accuracy is exactly 7/10 = 0.70, and once the
// single concept is accepted the optimized prompt scores 10/10 = 1.00.
// Training yields 9 alpha failures; the first one drives the concept to
// acceptance (5/5 probes pass) and the other eight collapse onto the
// already-accepted id and are skipped without verification.
// ---------------------------------------------------------------------------

struct LiftScenario {
  std::filesystem::path dir;
  std::filesystem::path config_path;
  std::string concept_text;
  json weak_rules;
  json strong_rules;
  json transfer_sensitive_rules;
  json transfer_insensitive_rules;
};

inline std::string lift_alpha_question(int i) {
  return "Problem A" + std::to_string(i) + ": the tank meter reads " + std::to_string(40 + i) +
         " percent of a 100 liter tank. After filling completely, how many liters does the tank "
         "hold?";
}

inline std::pair<std::string, int> lift_beta_question(int i) {
  int a = 100 + 7 * i;
  int b = 200 + 3 * i;
  return {"Problem B" + std::to_string(i) + ": what is " + std::to_string(a) + " plus " +
              std::to_string(b) + "?",
          a + b};
}

inline std::string two_digit(int i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

// Writes dataset, template, fixtures, and config.json under `dir` and
// returns everything a test needs to drive and check the run.
inline LiftScenario make_lift_scenario(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  LiftScenario sc;
  sc.dir = dir;
  sc.concept_text =
      "Always report the tank's full capacity in liters as the final numeric answer.";

  // Dataset: 15 alpha + 35 beta.
  std::string data;
  for (int i = 1; i <= 15; ++i) {
    data += json{{"id", "a" + two_digit(i)},
                 {"question", lift_alpha_question(i)},
                 {"answer", 100},
                 {"stratum", "alpha"}}
                .dump() +
            "\n";
  }
  for (int i = 1; i <= 35; ++i) {
    auto [q, ans] = lift_beta_question(i);
    data += json{{"id", "b" + two_digit(i)}, {"question", q}, {"answer", ans}, {"stratum", "beta"}}
                .dump() +
            "\n";
  }
  cdist::write_file_atomic(dir / "dataset.jsonl", data);

  cdist::write_file_atomic(dir / "base_prompt.tmpl",
                           "template_id: word-math\n"
                           "---\n"
                           "<system>\n"
                           "You are a helpful assistant that performs {task}. Follow the given "
                           "instructions to complete the task successfully.\n"
                           "<user>\n"
                           "Instructions: {initial_prompt}\n"
                           "\n"
                           "Problem: {question}\n");

  // Weak model: per-question beta rules first (most specific), then the
  // concept-sensitive rule, then the generic wrong answer for tank talk.
  sc.weak_rules = json::array();
  for (int i = 1; i <= 35; ++i) {
    auto [q, ans] = lift_beta_question(i);
    sc.weak_rules.push_back(
        substring_rule(q, "The sum works out neatly. Answer: " + std::to_string(ans)));
  }
  sc.weak_rules.push_back(
      substring_rule(sc.concept_text, "The full tank holds its stated capacity. Answer: 100"));
  sc.weak_rules.push_back(substring_rule("tank", "I will just read the gauge. Answer: 7"));

  // Strong model: one rule per meta-prompt stage, anchored on wording
  // unique to that stage's conversation.
  sc.strong_rules = json::array();
  sc.strong_rules.push_back(substring_rule(
      "reasons why the generated response failed?",
      "1. The response reported a gauge reading instead of the tank capacity.\n"
      "2. The final number was not the full tank volume in liters."));
  sc.strong_rules.push_back(substring_rule(
      "concepts that can be added to the prompt to ensure the task", "1. " + sc.concept_text));
  sc.strong_rules.push_back(substring_rule("unique, valid concepts", "- " + sc.concept_text));

  // Transfer targets: one model that benefits from the concept exactly like
  // the weak model, one that ignores it entirely.
  sc.transfer_sensitive_rules = sc.weak_rules;
  sc.transfer_insensitive_rules = json::array();
  for (int i = 1; i <= 35; ++i) {
    auto [q, ans] = lift_beta_question(i);
    sc.transfer_insensitive_rules.push_back(
        substring_rule(q, "The sum works out neatly. Answer: " + std::to_string(ans)));
  }
  sc.transfer_insensitive_rules.push_back(
      substring_rule("tank", "I will just read the gauge. Answer: 7"));

  cdist::write_file_atomic(dir / "weak.json", sc.weak_rules.dump(2) + "\n");
  cdist::write_file_atomic(dir / "strong.json", sc.strong_rules.dump(2) + "\n");
  cdist::write_file_atomic(dir / "transfer_sensitive.json",
                           sc.transfer_sensitive_rules.dump(2) + "\n");
  cdist::write_file_atomic(dir / "transfer_insensitive.json",
                           sc.transfer_insensitive_rules.dump(2) + "\n");

  json config{
      {"run_name", "tank-lift"},
      {"models",
       json{{"weak", json{{"backend", "mock"}, {"fixture", "weak.json"}}},
            {"strong", json{{"backend", "mock"}, {"fixture", "strong.json"}}},
            {"transfer_sensitive",
             json{{"backend", "mock"}, {"fixture", "transfer_sensitive.json"}}},
            {"transfer_insensitive",
             json{{"backend", "mock"}, {"fixture", "transfer_insensitive.json"}}}}},
      {"dataset", json{{"path", "dataset.jsonl"},
                       {"format", "jsonl_math"},
                       {"fractions", json{{"train", 0.6}, {"validation", 0.2}, {"test", 0.2}}},
                       {"seed", 20250817}}},
      {"templates",
       json{{"base_prompt", "base_prompt.tmpl"},
            {"bindings",
             json{{"initial_prompt",
                   "Solve the word problem. End your reply with 'Answer: <number>'."}}}}},
      {"task_description", "math word problems"},
      {"run_dir", "run"},
      {"parallelism", 4}};
  sc.config_path = dir / "config.json";
  cdist::write_file_atomic(sc.config_path, config.dump(2) + "\n");
  return sc;
}

// ---------------------------------------------------------------------------
// Randomized gate-soundness scenario.
//
// Each instance draws 2-5 "clusters" of three near-identical questions plus
// a few easy fillers.  A per-cluster accept bit decides whether the weak
// mock honors that cluster's corrective concept:
//   bit = 1: the cluster answer is the shared calibrated total 777 and a
//     rule keyed on the concept's unique token answers 777, so its probes
//     pass and the concept must be accepted.
//   bit = 0: the cluster answer is 2000+i, no rule honors the concept, so
//     every probe stays wrong and the concept must be rejected (and its
//     re-induction returns the identical text, which the runner drops as
//     already settled).
// Split fractions of 1/3 each force exactly one cluster member into every
// split, so the train member is always harvested and the validation member
// is always the top-similarity probe.
// ---------------------------------------------------------------------------

struct GateScenario {
  cdist::RunConfig config;
  cdist::MockScript weak;
  cdist::MockScript strong;
  int n_clusters = 0;
  std::vector<bool> accept_bit;            // [0] unused; indexed by cluster 1..n
  std::vector<std::string> concept_texts;  // same indexing
};

// The variant token is cluster-qualified ("va03", not "va") so that two
// members of the same cluster always share strictly more word tokens than
// members of different clusters (7/9 vs 6/10 Jaccard).  Without that, a
// cross-cluster pair with the same variant letter ties the same-cluster
// score and the deterministic id tie-break can hand a concept a probe from
// a foreign cluster it was never meant to fix.
inline std::string gate_cluster_question(int cluster, char member) {
  return "cluster grp" + two_digit(cluster) + " problem variant v" + std::string(1, member) +
         two_digit(cluster) + ": compute the total";
}

inline std::string gate_concept_text(int cluster) {
  return "usegrp" + two_digit(cluster) + "rule: when a problem mentions grp" + two_digit(cluster) +
         ", report the calibrated total.";
}

inline GateScenario make_gate_scenario(std::mt19937_64& rng, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  GateScenario sc;
  sc.n_clusters = 2 + static_cast<int>(rng() % 4);  // 2..5
  int n_easy = 1 + static_cast<int>(rng() % 3);     // 1..3
  sc.accept_bit.assign(static_cast<std::size_t>(sc.n_clusters) + 1, false);
  sc.concept_texts.assign(static_cast<std::size_t>(sc.n_clusters) + 1, "");

  std::string data;
  for (int i = 1; i <= sc.n_clusters; ++i) {
    sc.accept_bit[static_cast<std::size_t>(i)] = (rng() % 2) == 1;
    sc.concept_texts[static_cast<std::size_t>(i)] = gate_concept_text(i);
    int answer = sc.accept_bit[static_cast<std::size_t>(i)] ? 777 : 2000 + i;
    for (char m : {'a', 'b', 'c'}) {
      data += json{{"id", "c" + two_digit(i) + std::string(1, m)},
                   {"question", gate_cluster_question(i, m)},
                   {"answer", answer},
                   {"stratum", "g" + two_digit(i)}}
                  .dump() +
              "\n";
    }
  }
  std::vector<std::pair<std::string, int>> easy;
  for (int j = 1; j <= n_easy; ++j) {
    int a = 10 + j, b = 20 + 2 * j;
    std::string q = "easy e" + std::to_string(j) + " sum: what is " + std::to_string(a) +
                    " plus " + std::to_string(b);
    easy.emplace_back(q, a + b);
    data += json{{"id", "e" + std::to_string(j)}, {"question", q}, {"answer", a + b},
                 {"stratum", "easy"}}
                .dump() +
            "\n";
  }
  cdist::write_file_atomic(dir / "dataset.jsonl", data);
  cdist::write_file_atomic(dir / "base_prompt.tmpl",
                           "template_id: gate\n"
                           "---\n"
                           "<user>\n"
                           "Instructions: {initial_prompt}\n"
                           "\n"
                           "Problem: {question}\n");

  // Weak mock: easy questions answered exactly; accept-bit clusters honor
  // their concept's unique token; every cluster has a distinctive wrong
  // fallthrough keyed on its question pattern.
  for (const auto& [q, ans] : easy) {
    sc.weak.add_substring_rule(q, "Answer: " + std::to_string(ans));
  }
  for (int i = 1; i <= sc.n_clusters; ++i) {
    if (sc.accept_bit[static_cast<std::size_t>(i)]) {
      sc.weak.add_substring_rule("usegrp" + two_digit(i) + "rule", "Answer: 777");
    }
  }
  for (int i = 1; i <= sc.n_clusters; ++i) {
    sc.weak.add_substring_rule("grp" + two_digit(i) + " problem",
                               "Answer: " + std::to_string(i + 50));
  }

  // Strong mock: generic failure reasons; per-cluster induction keyed on
  // the cluster's distinctive wrong answer; per-cluster refinement keyed on
  // the concept's unique token (induction rules come first, so re-induction
  // conversations that embed rejected texts still route to induction).
  sc.strong.add_substring_rule("reasons why the generated response failed?",
                               "1. The answer used a raw reading instead of the calibrated "
                               "total.\n2. The response ignored the group calibration rule.");
  for (int i = 1; i <= sc.n_clusters; ++i) {
    sc.strong.add_substring_rule("The response was: Answer: " + std::to_string(i + 50),
                                 "1. " + sc.concept_texts[static_cast<std::size_t>(i)]);
  }
  for (int i = 1; i <= sc.n_clusters; ++i) {
    sc.strong.add_substring_rule("usegrp" + two_digit(i) + "rule",
                                 "- " + sc.concept_texts[static_cast<std::size_t>(i)]);
  }

  cdist::RunConfig cfg;
  cfg.run_name = "gate-soundness";
  cdist::ModelHandle weak_h;
  weak_h.id = "weak";
  cdist::ModelHandle strong_h;
  strong_h.id = "strong";
  cfg.models["weak"] = weak_h;
  cfg.models["strong"] = strong_h;
  cfg.dataset.path = dir / "dataset.jsonl";
  cfg.dataset.fractions = cdist::SplitFractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  cfg.dataset.seed = rng();
  cfg.templates.base_prompt = dir / "base_prompt.tmpl";
  cfg.templates.bindings["initial_prompt"] =
      "Answer the problem. End with 'Answer: <number>'.";
  cfg.task_description = "group calibration problems";
  cfg.verification.probe_count = 2;
  cfg.parallelism = 1;  // keep the thousand-run sweep cheap
  sc.config = std::move(cfg);
  return sc;
}

}  // namespace testsupport
