#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "cdist/digest.hpp"
#include "cdist/errors.hpp"
#include "cdist/util.hpp"

namespace cdist {

// Lifecycle: induced -> refined -> accepted | rejected.  Transitions only
// move forward; a concept that skips verification stays refined and never
// reaches a prompt.
enum class ConceptStatus { induced, refined, accepted, rejected };

inline const char* concept_status_name(ConceptStatus s) {
  switch (s) {
    case ConceptStatus::induced: return "induced";
    case ConceptStatus::refined: return "refined";
    case ConceptStatus::accepted: return "accepted";
    case ConceptStatus::rejected: return "rejected";
  }
  return "induced";
}

inline ConceptStatus concept_status_from_name(std::string_view s) {
  if (s == "induced") return ConceptStatus::induced;
  if (s == "refined") return ConceptStatus::refined;
  if (s == "accepted") return ConceptStatus::accepted;
  if (s == "rejected") return ConceptStatus::rejected;
  throw Error("unknown concept status: " + std::string(s));
}

// Summary of the probe-set check that settled a concept's fate.
struct ConceptVerification {
  double pass_rate = 0.0;
  bool accepted = false;
  int round = 0;

  bool operator==(const ConceptVerification&) const = default;
};

// Identity is content-addressed over the normalized text, so trivial
// restatements ("Check units", "check units.") collapse to one id while
// distinct instructions never collide.
inline std::string normalize_concept_text(std::string_view text) {
  std::string t = normalize_text(text);
  while (!t.empty() && t.back() == '.') t.pop_back();
  return trim(t);
}

inline std::string concept_id_for(std::string_view text) {
  return sha256_hex("cdist-concept-v1\n" + normalize_concept_text(text));
}

struct Concept {
  std::string concept_id;
  std::string text;
  ConceptStatus status = ConceptStatus::induced;
  std::vector<std::string> provenance;  // failure example ids this grew from
  std::string batch_ref;                // induction batch that produced it
  std::optional<ConceptVerification> verification;

  static Concept induced_from(std::string text_in, std::vector<std::string> provenance_in,
                              std::string batch_ref_in) {
    Concept c;
    c.text = std::move(text_in);
    c.concept_id = concept_id_for(c.text);
    c.status = ConceptStatus::induced;
    c.provenance = std::move(provenance_in);
    c.batch_ref = std::move(batch_ref_in);
    return c;
  }

  bool operator==(const Concept&) const = default;
};

inline json concept_to_json(const Concept& c) {
  json j{{"concept_id", c.concept_id},
         {"text", c.text},
         {"status", concept_status_name(c.status)},
         {"provenance", c.provenance},
         {"batch_ref", c.batch_ref}};
  if (c.verification) {
    j["verification"] = json{{"pass_rate", c.verification->pass_rate},
                             {"accepted", c.verification->accepted},
                             {"round", c.verification->round}};
  }
  return j;
}

inline Concept concept_from_json(const json& j) {
  Concept c;
  c.concept_id = j.at("concept_id").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.status = concept_status_from_name(j.at("status").get<std::string>());
  if (j.contains("provenance")) c.provenance = j.at("provenance").get<std::vector<std::string>>();
  c.batch_ref = j.value("batch_ref", "");
  if (j.contains("verification")) {
    const json& v = j.at("verification");
    c.verification = ConceptVerification{v.value("pass_rate", 0.0), v.value("accepted", false),
                                         v.value("round", 0)};
  }
  return c;
}

}  // namespace cdist
