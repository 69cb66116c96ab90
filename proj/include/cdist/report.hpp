#pragma once

// The run report: everything an audit needs to see in one document, with a
// JSON form (machine) and a markdown form (humans).

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdist/concepts.hpp"
#include "cdist/util.hpp"

namespace cdist {

struct TransferRow {
  double base = 0.0;
  double cd = 0.0;
  double delta = 0.0;

  bool operator==(const TransferRow&) const = default;
};

struct RunReport {
  int schema_version = 1;
  std::int64_t generated_at_ms = 0;
  std::string run_name;
  // model id -> phase (e.g. "train", "test") -> accuracy
  std::map<std::string, std::map<std::string, double>> base_accuracy;
  std::map<std::string, std::map<std::string, double>> cd_accuracy;
  std::vector<Concept> accepted_concepts;
  int rejected_count = 0;
  int failures_harvested = 0;
  int failures_processed = 0;
  std::uint64_t calls_made = 0;
  bool partial = false;  // a budget stopped the run early
  std::vector<std::string> warnings;
  std::optional<std::map<std::string, TransferRow>> transfer_matrix;

  bool operator==(const RunReport&) const = default;
};

inline json report_to_json(const RunReport& r) {
  json accepted = json::array();
  for (const auto& c : r.accepted_concepts) accepted.push_back(concept_to_json(c));
  json j{{"schema_version", r.schema_version},
         {"generated_at_ms", r.generated_at_ms},
         {"run_name", r.run_name},
         {"base_accuracy", r.base_accuracy},
         {"cd_accuracy", r.cd_accuracy},
         {"accepted_concepts", accepted},
         {"rejected_count", r.rejected_count},
         {"failures_harvested", r.failures_harvested},
         {"failures_processed", r.failures_processed},
         {"calls_made", r.calls_made},
         {"partial", r.partial},
         {"warnings", r.warnings}};
  if (r.transfer_matrix) {
    json tm = json::object();
    for (const auto& [id, row] : *r.transfer_matrix) {
      tm[id] = json{{"base", row.base}, {"cd", row.cd}, {"delta", row.delta}};
    }
    j["transfer_matrix"] = tm;
  }
  return j;
}

inline RunReport report_from_json(const json& j) {
  RunReport r;
  r.schema_version = j.value("schema_version", 1);
  r.generated_at_ms = j.value("generated_at_ms", std::int64_t{0});
  r.run_name = j.value("run_name", "");
  if (j.contains("base_accuracy")) {
    r.base_accuracy = j.at("base_accuracy").get<decltype(r.base_accuracy)>();
  }
  if (j.contains("cd_accuracy")) r.cd_accuracy = j.at("cd_accuracy").get<decltype(r.cd_accuracy)>();
  for (const auto& c : j.value("accepted_concepts", json::array())) {
    r.accepted_concepts.push_back(concept_from_json(c));
  }
  r.rejected_count = j.value("rejected_count", 0);
  r.failures_harvested = j.value("failures_harvested", 0);
  r.failures_processed = j.value("failures_processed", 0);
  r.calls_made = j.value("calls_made", std::uint64_t{0});
  r.partial = j.value("partial", false);
  r.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("transfer_matrix")) {
    std::map<std::string, TransferRow> tm;
    for (const auto& [id, row] : j.at("transfer_matrix").items()) {
      tm[id] = TransferRow{row.value("base", 0.0), row.value("cd", 0.0), row.value("delta", 0.0)};
    }
    r.transfer_matrix = std::move(tm);
  }
  return r;
}

// Display-only rounding for accuracies, deltas, and pass rates: four decimals
// is plenty for a metric table, and it keeps computed values like 1.0 - 0.7
// from rendering with floating-point noise.  JSON artifacts keep raw doubles.
inline std::string format_metric(double v) {
  return format_double(std::round(v * 1e4) / 1e4);
}

namespace detail {

inline std::string pct(double v) { return format_metric(v); }

}  // namespace detail

inline std::string report_to_markdown(const RunReport& r) {
  std::string md = "# Run report";
  if (!r.run_name.empty()) md += ": " + r.run_name;
  md += "\n\n";
  if (r.partial) md += "**Partial run** — a budget limit stopped processing early.\n\n";

  md += "## Accuracy\n\n| model | phase | base | optimized |\n|---|---|---|---|\n";
  for (const auto& [model, phases] : r.base_accuracy) {
    for (const auto& [phase, acc] : phases) {
      md += "| " + model + " | " + phase + " | " + detail::pct(acc) + " | ";
      auto mit = r.cd_accuracy.find(model);
      if (mit != r.cd_accuracy.end() && mit->second.count(phase)) {
        md += detail::pct(mit->second.at(phase));
      } else {
        md += "-";
      }
      md += " |\n";
    }
  }

  md += "\n## Accepted concepts (" + std::to_string(r.accepted_concepts.size()) + ")\n\n";
  if (r.accepted_concepts.empty()) {
    md += "None.\n";
  } else {
    for (const auto& c : r.accepted_concepts) {
      md += "- " + c.text;
      if (c.verification) {
        md += " _(pass rate " + detail::pct(c.verification->pass_rate) + ")_";
      }
      md += "\n";
    }
  }
  md += "\nRejected concept batches: " + std::to_string(r.rejected_count) + "\n";
  md += "\nFailures harvested: " + std::to_string(r.failures_harvested) + ", processed: " +
        std::to_string(r.failures_processed) + "\n";
  md += "\nModel calls: " + std::to_string(r.calls_made) + "\n";

  if (r.transfer_matrix) {
    md += "\n## Transfer\n\n| model | base | optimized | delta |\n|---|---|---|---|\n";
    for (const auto& [id, row] : *r.transfer_matrix) {
      md += "| " + id + " | " + detail::pct(row.base) + " | " + detail::pct(row.cd) + " | " +
            detail::pct(row.delta) + " |\n";
    }
  }

  if (!r.warnings.empty()) {
    md += "\n## Warnings\n\n";
    for (const auto& w : r.warnings) md += "- " + w + "\n";
  }
  return md;
}

}  // namespace cdist
