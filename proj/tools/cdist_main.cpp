// cdist — concept-distillation prompt optimizer.
//
// Subcommands:
//   run       full improvement loop from a config file
//   eval      score one model x prompt x dataset
//   transfer  apply a finished run's concepts to other model handles
//   report    render a run's report as markdown or JSON
//
// Exit codes: 0 success, 2 run completed but partial (budget hit),
// 3 configuration/usage error, 4 runtime failure.

#include <CLI11.hpp>

#include <cdist/cdist.hpp>
#include <cdist/http_client.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

bool any_http_handle(const cdist::RunConfig& cfg) {
  for (const auto& [id, h] : cfg.models) {
    if (h.backend == cdist::Backend::http) return true;
  }
  return false;
}

int cmd_run(const std::string& config_path, const std::string& run_dir_override) {
  cdist::RunConfig cfg = cdist::load_run_config(config_path);
  if (!run_dir_override.empty()) cfg.run_dir = run_dir_override;
  if (cfg.run_dir.empty()) {
    throw cdist::ConfigError("run needs a run_dir (config field or --run-dir)");
  }
  cdist::Runner runner(cfg);
  if (any_http_handle(cfg)) {
    runner.set_transport(std::make_shared<cdist::HttpChatTransport>());
  }
  cdist::RunReport report = runner.run();
  std::cout << cdist::report_to_markdown(report) << "\n";
  std::cout << "Artifacts: " << cfg.run_dir.string() << "\n";
  return report.partial ? kExitPartial : kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& model_id,
             const std::string& prompt_path, const std::string& dataset_path,
             const std::string& format_flag) {
  cdist::RunConfig cfg = cdist::load_run_config(config_path);
  const cdist::ModelHandle& handle = cfg.model(model_id);

  cdist::RunLedger ledger;
  cdist::Gateway gateway(cfg.cache_dir, &ledger, cfg.parallelism);
  gateway.set_default_credential_env(cfg.credential_env);
  for (const auto& [id, h] : cfg.models) {
    if (h.backend == cdist::Backend::mock && !h.fixture_path.empty()) {
      gateway.register_mock(id, cdist::MockScript::from_file(h.fixture_path));
    }
  }
  if (any_http_handle(cfg)) {
    gateway.set_transport(std::make_shared<cdist::HttpChatTransport>());
  }

  cdist::DatasetFormat format =
      format_flag.empty() ? cfg.dataset.format : cdist::dataset_format_from_name(format_flag);
  cdist::Dataset data = cdist::load_dataset(dataset_path, format);

  // --prompt accepts either a saved prompt spec (JSON) or a template file.
  cdist::RenderedPromptSpec spec;
  std::string text = cdist::read_file(prompt_path);
  bool parsed_spec = false;
  try {
    cdist::json j = cdist::json::parse(text);
    if (j.is_object() && j.contains("template")) {
      spec = cdist::prompt_spec_from_json(j);
      parsed_spec = true;
    }
  } catch (const cdist::json::exception&) {
    // fall through to template parsing
  }
  if (!parsed_spec) {
    spec.tmpl = cdist::parse_template_text(text, std::filesystem::path(prompt_path).stem().string());
    spec.static_bindings = cfg.templates.bindings;
    if (!spec.static_bindings.count("task")) spec.static_bindings["task"] = cfg.task_description;
    spec.placement = cfg.templates.placement;
  }

  cdist::PipelineContext ctx;
  ctx.gateway = &gateway;
  ctx.ledger = &ledger;
  ctx.judge_policy = cfg.judge;
  ctx.parallelism = cfg.parallelism;

  cdist::AccuracyReport rep = cdist::evaluate(ctx, handle, spec, data, "eval");
  cdist::json out{{"model", handle.id},
                  {"dataset", dataset_path},
                  {"total", rep.total},
                  {"correct", rep.correct},
                  {"errors", rep.errors},
                  {"accuracy", rep.accuracy}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_transfer(const std::string& run_dir, const std::vector<std::string>& targets) {
  cdist::Runner runner(cdist::Runner::saved_config(run_dir), /*resume_ledger=*/true);
  runner.load_saved_state();
  if (any_http_handle(runner.config())) {
    runner.set_transport(std::make_shared<cdist::HttpChatTransport>());
  }
  auto rows = runner.transfer(targets);
  std::cout << "| model | base | optimized | delta |\n|---|---|---|---|\n";
  for (const auto& [id, row] : rows) {
    std::cout << "| " << id << " | " << cdist::format_metric(row.base) << " | "
              << cdist::format_metric(row.cd) << " | " << cdist::format_metric(row.delta)
              << " |\n";
  }
  std::cout << "Updated: " << (std::filesystem::path(run_dir) / "report.json").string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
  cdist::json j = cdist::json::parse(cdist::read_file(std::filesystem::path(run_dir) / "report.json"));
  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else if (format == "md") {
    std::cout << cdist::report_to_markdown(cdist::report_from_json(j)) << "\n";
  } else {
    throw cdist::ConfigError("--format must be md or json");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept distillation: harvest weak-model failures, distill corrective concepts, "
               "verify them, and ship an improved prompt"};
  app.require_subcommand(1);

  std::string config_path, run_dir_override;
  CLI::App* run = app.add_subcommand("run", "execute the full improvement loop");
  run->add_option("--config", config_path, "run config JSON")->required();
  run->add_option("--run-dir", run_dir_override, "override the config's run_dir");

  std::string eval_config, eval_model, eval_prompt, eval_dataset, eval_format;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a model with a prompt on a dataset");
  eval->add_option("--config", eval_config, "run config JSON (model handles)")->required();
  eval->add_option("--model", eval_model, "model handle id")->required();
  eval->add_option("--prompt", eval_prompt, "prompt spec JSON or template file")->required();
  eval->add_option("--dataset", eval_dataset, "JSONL dataset path")->required();
  eval->add_option("--format", eval_format, "jsonl_math or jsonl_code (default: config)");

  std::string transfer_run;
  std::vector<std::string> transfer_targets;
  CLI::App* transfer = app.add_subcommand("transfer", "apply accepted concepts to other models");
  transfer->add_option("--run", transfer_run, "completed run directory")->required();
  transfer->add_option("--targets", transfer_targets, "target model handle ids")
      ->required()
      ->delimiter(',');

  std::string report_run, report_format = "md";
  CLI::App* report = app.add_subcommand("report", "render a run report");
  report->add_option("--run", report_run, "run directory")->required();
  report->add_option("--format", report_format, "md or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, run_dir_override);
    if (eval->parsed()) return cmd_eval(eval_config, eval_model, eval_prompt, eval_dataset, eval_format);
    if (transfer->parsed()) return cmd_transfer(transfer_run, transfer_targets);
    if (report->parsed()) return cmd_report(report_run, report_format);
    return kExitConfig;
  } catch (const cdist::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cdist::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cdist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
