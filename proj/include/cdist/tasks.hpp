#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdist/errors.hpp"
#include "cdist/numeric.hpp"
#include "cdist/util.hpp"

namespace cdist {

enum class GroundTruthKind { numeric, exact_text, code_tests };

inline const char* ground_truth_kind_name(GroundTruthKind k) {
  switch (k) {
    case GroundTruthKind::numeric: return "numeric";
    case GroundTruthKind::exact_text: return "exact_text";
    case GroundTruthKind::code_tests: return "code_tests";
  }
  return "numeric";
}

struct GroundTruth {
  GroundTruthKind kind = GroundTruthKind::numeric;
  double numeric_value = 0.0;
  std::string canonical_text;  // exact_text target
  std::string test_suite;      // code_tests: executable assertions
  std::string entry_point;     // code_tests: function under test

  static GroundTruth number(double v) {
    GroundTruth g;
    g.kind = GroundTruthKind::numeric;
    g.numeric_value = v;
    return g;
  }
  static GroundTruth text(std::string s) {
    GroundTruth g;
    g.kind = GroundTruthKind::exact_text;
    g.canonical_text = std::move(s);
    return g;
  }
  static GroundTruth code(std::string tests, std::string entry) {
    GroundTruth g;
    g.kind = GroundTruthKind::code_tests;
    g.test_suite = std::move(tests);
    g.entry_point = std::move(entry);
    return g;
  }

  bool operator==(const GroundTruth&) const = default;
};

// Human-readable form used when a prompt needs to show "the expected
// answer" (failure analysis, probe synthesis).
inline std::string ground_truth_display(const GroundTruth& g) {
  switch (g.kind) {
    case GroundTruthKind::numeric: return format_double(g.numeric_value);
    case GroundTruthKind::exact_text: return g.canonical_text;
    case GroundTruthKind::code_tests: return "code passing these tests:\n" + g.test_suite;
  }
  return "";
}

struct TaskExample {
  std::string example_id;
  std::string input;
  GroundTruth ground_truth;
  std::string stratum;  // optional difficulty/category tag

  bool operator==(const TaskExample&) const = default;
};

enum class SplitTag { unsplit, train, validation, test };

inline const char* split_tag_name(SplitTag t) {
  switch (t) {
    case SplitTag::unsplit: return "unsplit";
    case SplitTag::train: return "train";
    case SplitTag::validation: return "validation";
    case SplitTag::test: return "test";
  }
  return "unsplit";
}

struct Dataset {
  std::string name;
  std::vector<TaskExample> examples;
  SplitTag split = SplitTag::unsplit;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

enum class DatasetFormat { jsonl_math, jsonl_code };

inline DatasetFormat dataset_format_from_name(std::string_view s) {
  if (s == "jsonl_math") return DatasetFormat::jsonl_math;
  if (s == "jsonl_code") return DatasetFormat::jsonl_code;
  throw ConfigError("unknown dataset format: " + std::string(s));
}

inline const char* dataset_format_name(DatasetFormat f) {
  return f == DatasetFormat::jsonl_math ? "jsonl_math" : "jsonl_code";
}

namespace detail {

inline std::string require_string(const json& j, const char* field, std::size_t line_no) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw ParseError(line_no, std::string("missing string field '") + field + "'");
  }
  return j.at(field).get<std::string>();
}

inline double parse_answer_field(const json& j, std::size_t line_no) {
  if (!j.contains("answer")) throw ParseError(line_no, "missing field 'answer'");
  const json& a = j.at("answer");
  if (a.is_number()) return a.get<double>();
  if (a.is_string()) {
    auto v = parse_number(trim(a.get<std::string>()));
    if (v) return *v;
    throw ParseError(line_no, "answer is not numeric: " + a.get<std::string>());
  }
  throw ParseError(line_no, "answer must be a number or numeric string");
}

}  // namespace detail

// Loads a JSONL dataset.  jsonl_math lines: {id, question, answer[, stratum]}
// with a numeric answer; jsonl_code lines: {id, prompt, tests, entry_point
// [, stratum]}.  Blank lines are skipped; anything else malformed raises
// ParseError with its line number.
inline Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  Dataset d;
  d.name = path.stem().string();
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    TaskExample ex;
    ex.example_id = detail::require_string(j, "id", line_no);
    if (ex.example_id.empty()) throw ParseError(line_no, "empty id");
    if (!seen_ids.insert(ex.example_id).second) {
      throw DuplicateIdError("duplicate example id '" + ex.example_id + "' at line " +
                             std::to_string(line_no));
    }
    if (j.contains("stratum")) ex.stratum = j.at("stratum").get<std::string>();
    if (format == DatasetFormat::jsonl_math) {
      ex.input = detail::require_string(j, "question", line_no);
      ex.ground_truth = GroundTruth::number(detail::parse_answer_field(j, line_no));
    } else {
      ex.input = detail::require_string(j, "prompt", line_no);
      ex.ground_truth = GroundTruth::code(detail::require_string(j, "tests", line_no),
                                          j.value("entry_point", ""));
    }
    if (trim(ex.input).empty()) throw ParseError(line_no, "empty input text");
    d.examples.push_back(std::move(ex));
  }
  return d;
}

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;

  void validate() const {
    if (train <= 0 || validation <= 0 || test <= 0) {
      throw ConfigError("split fractions must all be positive");
    }
    if (std::fabs(train + validation + test - 1.0) > 1e-9) {
      throw ConfigError("split fractions must sum to 1");
    }
  }
};

// Deterministic stratified split.
//
// Within each stratum (processed in sorted-key order) the example ids are
// sorted and then shuffled by an RNG seeded from (seed, stratum key), so
// membership is a pure function of seed + content — permuting the input
// file changes nothing.  Per-stratum counts are fraction*n floored, with
// leftover slots granted to the split that is most underserved globally
// so far (running deficit + local fractional remainder; ties prefer the
// larger remainder, then train < validation < test).  That keeps every
// stratum within one example of fraction*n while the global totals land
// exactly on the fractions whenever they divide evenly.
inline std::array<Dataset, 3> split_dataset(const Dataset& d, const SplitFractions& fractions,
                                            std::uint64_t seed) {
  if (d.empty()) throw EmptyDatasetError("cannot split an empty dataset");
  fractions.validate();

  std::map<std::string, std::vector<std::string>> strata;  // key -> example ids
  for (const auto& ex : d.examples) strata[ex.stratum].push_back(ex.example_id);

  const double frac[3] = {fractions.train, fractions.validation, fractions.test};
  double deficit[3] = {0.0, 0.0, 0.0};
  std::map<std::string, int> membership;  // id -> split index

  for (auto& [key, ids] : strata) {
    std::sort(ids.begin(), ids.end());
    std::uint64_t kh = fnv1a64(key);
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(kh), static_cast<std::uint32_t>(kh >> 32)};
    std::mt19937_64 rng(sseq);
    std::shuffle(ids.begin(), ids.end(), rng);

    const std::size_t n = ids.size();
    double exact[3];
    std::size_t base[3];
    std::size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      exact[s] = frac[s] * static_cast<double>(n);
      base[s] = static_cast<std::size_t>(exact[s] + 1e-9);  // floor, tolerant of fp dust
      assigned += base[s];
    }
    std::size_t leftover = n - assigned;
    std::size_t count[3] = {base[0], base[1], base[2]};
    std::vector<int> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      double need_a = deficit[a] + (exact[a] - static_cast<double>(base[a]));
      double need_b = deficit[b] + (exact[b] - static_cast<double>(base[b]));
      if (std::fabs(need_a - need_b) > 1e-12) return need_a > need_b;
      double rem_a = exact[a] - static_cast<double>(base[a]);
      double rem_b = exact[b] - static_cast<double>(base[b]);
      if (std::fabs(rem_a - rem_b) > 1e-12) return rem_a > rem_b;
      return a < b;
    });
    for (std::size_t k = 0; k < leftover; ++k) ++count[order[k % 3]];
    for (int s = 0; s < 3; ++s) deficit[s] += exact[s] - static_cast<double>(count[s]);

    std::size_t idx = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < count[s]; ++k) membership[ids[idx++]] = s;
    }
  }

  std::array<Dataset, 3> out;
  const SplitTag tags[3] = {SplitTag::train, SplitTag::validation, SplitTag::test};
  for (int s = 0; s < 3; ++s) {
    out[s].name = d.name + "-" + split_tag_name(tags[s]);
    out[s].split = tags[s];
  }
  // Preserve original dataset order within each split.
  for (const auto& ex : d.examples) out[membership.at(ex.example_id)].examples.push_back(ex);
  return out;
}

}  // namespace cdist
