#pragma once

// Run configuration: models, dataset, templates, policies, budgets.
// Loaded from JSON; relative paths resolve against the config file's own
// directory so runs are launchable from anywhere.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "cdist/errors.hpp"
#include "cdist/gateway.hpp"
#include "cdist/judge.hpp"
#include "cdist/prompting.hpp"
#include "cdist/tasks.hpp"
#include "cdist/verification.hpp"

namespace cdist {

struct DatasetConfig {
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::jsonl_math;
  SplitFractions fractions;
  std::uint64_t seed = 0;
};

struct TemplateConfig {
  std::filesystem::path base_prompt;  // template file for the task prompt
  std::map<std::string, std::string> bindings;
  ConceptsPlacement placement = ConceptsPlacement::user_turn;
};

struct InductionConfig {
  int n_reasons = 3;
  int n_concepts = 3;
};

struct BudgetConfig {
  int max_failures_processed = 25;
  std::uint64_t max_total_calls = 500;
  int warn_prompt_tokens = 4000;  // soft ceiling for the optimized prompt
};

struct RunConfig {
  std::string run_name;
  std::map<std::string, ModelHandle> models;  // requires "weak" and "strong"
  DatasetConfig dataset;
  TemplateConfig templates;
  InductionConfig induction;
  VerificationPolicy verification;
  BudgetConfig budget;
  JudgePolicy judge;
  std::string task_description = "the task";
  std::filesystem::path run_dir;    // empty -> in-memory run (library use only)
  std::filesystem::path cache_dir;  // empty -> response cache disabled
  std::string credential_env = "CDIST_API_KEY";
  int parallelism = 4;
  int outer_rounds = 1;  // re-harvest against the updated prompt when > 1

  const ModelHandle& model(const std::string& id) const {
    auto it = models.find(id);
    if (it == models.end()) throw ConfigError("no model handle '" + id + "' in config");
    return it->second;
  }

  void validate() const {
    if (!models.count("weak")) throw ConfigError("config needs a 'weak' model handle");
    if (!models.count("strong")) throw ConfigError("config needs a 'strong' model handle");
    for (const auto& [id, h] : models) {
      if (id.empty()) throw ConfigError("model handle id must not be empty");
      if (h.backend == Backend::http && h.endpoint.empty()) {
        throw ConfigError("http handle '" + id + "' needs an endpoint");
      }
      // Mock handles without a fixture path are legal: scripts may be
      // registered on the gateway directly, and an unscripted call fails
      // with a descriptive error at invocation time.
    }
    if (dataset.path.empty()) throw ConfigError("config needs dataset.path");
    dataset.fractions.validate();
    if (templates.base_prompt.empty()) throw ConfigError("config needs templates.base_prompt");
    if (induction.n_reasons < 1 || induction.n_concepts < 1) {
      throw ConfigError("induction list sizes must be >= 1");
    }
    if (verification.threshold < 0.0 || verification.threshold > 1.0) {
      throw ConfigError("verification threshold must be in [0, 1]");
    }
    if (verification.probe_count < 2) throw ConfigError("probe_count must be >= 2");
    if (verification.max_reinduction_rounds < 0) {
      throw ConfigError("max_reinduction_rounds must be >= 0");
    }
    if (budget.max_failures_processed < 1 || budget.max_total_calls < 1) {
      throw ConfigError("budgets must be positive");
    }
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (outer_rounds < 1) throw ConfigError("outer_rounds must be >= 1");
  }
};

namespace detail {

inline ModelHandle model_handle_from_json(const std::string& id, const json& j,
                                          const std::filesystem::path& base_dir) {
  ModelHandle h;
  h.id = id;
  h.backend = backend_from_name(j.value("backend", "mock"));
  h.endpoint = j.value("endpoint", "");
  h.model_name = j.value("model_name", "");
  if (j.contains("decoding")) h.decoding = decoding_from_json(j.at("decoding"));
  h.credential_env = j.value("credential_env", "");
  if (j.contains("fixture")) {
    std::filesystem::path p = j.at("fixture").get<std::string>();
    h.fixture_path = p.is_absolute() ? p : base_dir / p;
  }
  return h;
}

inline json model_handle_to_json(const ModelHandle& h) {
  json j{{"backend", backend_name(h.backend)}, {"decoding", decoding_to_json(h.decoding)}};
  if (!h.endpoint.empty()) j["endpoint"] = h.endpoint;
  if (!h.model_name.empty()) j["model_name"] = h.model_name;
  if (!h.credential_env.empty()) j["credential_env"] = h.credential_env;
  if (!h.fixture_path.empty()) j["fixture"] = h.fixture_path.string();
  return j;
}

inline std::filesystem::path resolve(const json& j, const char* field,
                                     const std::filesystem::path& base_dir) {
  if (!j.contains(field)) return {};
  std::filesystem::path p = j.at(field).get<std::string>();
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

}  // namespace detail

inline RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    RunConfig c;
    c.run_name = j.value("run_name", "");
    if (j.contains("models")) {
      for (const auto& [id, mj] : j.at("models").items()) {
        c.models[id] = detail::model_handle_from_json(id, mj, base_dir);
      }
    }
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      c.dataset.path = detail::resolve(d, "path", base_dir);
      c.dataset.format = dataset_format_from_name(d.value("format", "jsonl_math"));
      if (d.contains("fractions")) {
        const json& f = d.at("fractions");
        c.dataset.fractions = SplitFractions{f.value("train", 0.8), f.value("validation", 0.1),
                                             f.value("test", 0.1)};
      }
      c.dataset.seed = d.value("seed", std::uint64_t{0});
    }
    if (j.contains("templates")) {
      const json& t = j.at("templates");
      c.templates.base_prompt = detail::resolve(t, "base_prompt", base_dir);
      if (t.contains("bindings")) {
        c.templates.bindings = t.at("bindings").get<std::map<std::string, std::string>>();
      }
      c.templates.placement = concepts_placement_from_name(t.value("concepts_placement", "user"));
    }
    if (j.contains("induction")) {
      c.induction.n_reasons = j.at("induction").value("n_reasons", 3);
      c.induction.n_concepts = j.at("induction").value("n_concepts", 3);
    }
    if (j.contains("verification")) {
      const json& v = j.at("verification");
      c.verification.threshold = v.value("threshold", 0.80);
      c.verification.probe_count = v.value("probe_count", 5);
      c.verification.probe_source = probe_source_from_name(v.value("probe_source", "validation_similar"));
      c.verification.max_reinduction_rounds = v.value("max_reinduction_rounds", 2);
      c.verification.per_concept = v.value("per_concept", false);
    }
    if (j.contains("budget")) {
      const json& b = j.at("budget");
      c.budget.max_failures_processed = b.value("max_failures_processed", 25);
      c.budget.max_total_calls = b.value("max_total_calls", std::uint64_t{500});
      c.budget.warn_prompt_tokens = b.value("warn_prompt_tokens", 4000);
    }
    if (j.contains("judge")) {
      const json& jd = j.at("judge");
      c.judge.numeric_abs_tol = jd.value("numeric_abs_tol", 1e-6);
      if (jd.contains("answer_markers")) {
        c.judge.answer_markers = jd.at("answer_markers").get<std::vector<std::string>>();
      }
      if (jd.contains("sandbox")) {
        const json& s = jd.at("sandbox");
        c.judge.sandbox.runner = s.value("runner", "python3");
        c.judge.sandbox.timeout_ms = s.value("timeout_ms", 10000);
        c.judge.sandbox.memory_mb = s.value("memory_mb", 512);
        c.judge.sandbox.concurrency = s.value("concurrency", 2);
        c.judge.sandbox_limiter = std::make_shared<Limiter>(c.judge.sandbox.concurrency);
      }
    }
    c.task_description = j.value("task_description", "the task");
    c.run_dir = detail::resolve(j, "run_dir", base_dir);
    c.cache_dir = detail::resolve(j, "cache_dir", base_dir);
    c.credential_env = j.value("credential_env", "CDIST_API_KEY");
    c.parallelism = j.value("parallelism", 4);
    c.outer_rounds = j.value("outer_rounds", 1);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

inline json run_config_to_json(const RunConfig& c) {
  json models = json::object();
  for (const auto& [id, h] : c.models) models[id] = detail::model_handle_to_json(h);
  return json{
      {"run_name", c.run_name},
      {"models", models},
      {"dataset", json{{"path", c.dataset.path.string()},
                       {"format", dataset_format_name(c.dataset.format)},
                       {"fractions", json{{"train", c.dataset.fractions.train},
                                          {"validation", c.dataset.fractions.validation},
                                          {"test", c.dataset.fractions.test}}},
                       {"seed", c.dataset.seed}}},
      {"templates", json{{"base_prompt", c.templates.base_prompt.string()},
                         {"bindings", c.templates.bindings},
                         {"concepts_placement", concepts_placement_name(c.templates.placement)}}},
      {"induction", json{{"n_reasons", c.induction.n_reasons}, {"n_concepts", c.induction.n_concepts}}},
      {"verification", json{{"threshold", c.verification.threshold},
                            {"probe_count", c.verification.probe_count},
                            {"probe_source", probe_source_name(c.verification.probe_source)},
                            {"max_reinduction_rounds", c.verification.max_reinduction_rounds},
                            {"per_concept", c.verification.per_concept}}},
      {"budget", json{{"max_failures_processed", c.budget.max_failures_processed},
                      {"max_total_calls", c.budget.max_total_calls},
                      {"warn_prompt_tokens", c.budget.warn_prompt_tokens}}},
      {"judge", json{{"numeric_abs_tol", c.judge.numeric_abs_tol},
                     {"answer_markers", c.judge.answer_markers},
                     {"sandbox", json{{"runner", c.judge.sandbox.runner},
                                      {"timeout_ms", c.judge.sandbox.timeout_ms},
                                      {"memory_mb", c.judge.sandbox.memory_mb},
                                      {"concurrency", c.judge.sandbox.concurrency}}}}},
      {"task_description", c.task_description},
      {"run_dir", c.run_dir.string()},
      {"cache_dir", c.cache_dir.string()},
      {"credential_env", c.credential_env},
      {"parallelism", c.parallelism},
      {"outer_rounds", c.outer_rounds}};
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  std::filesystem::path base_dir = path.has_parent_path()
                                       ? std::filesystem::absolute(path).parent_path()
                                       : std::filesystem::current_path();
  return run_config_from_json(j, base_dir);
}

}  // namespace cdist
