#pragma once

#include <nlohmann/json.hpp>

#include <optional>

#include "cdist/errors.hpp"
#include "cdist/util.hpp"

namespace cdist {

// Sampling parameters carried with every model call.  Greedy decoding is
// the default so repeated runs are reproducible.
struct DecodingParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<long long> seed;

  bool operator==(const DecodingParams&) const = default;
};

inline nlohmann::json decoding_to_json(const DecodingParams& d) {
  nlohmann::json j{{"temperature", d.temperature}, {"max_tokens", d.max_tokens}};
  if (d.seed) j["seed"] = *d.seed;
  return j;
}

inline DecodingParams decoding_from_json(const nlohmann::json& j) {
  DecodingParams d;
  if (j.contains("temperature")) d.temperature = j.at("temperature").get<double>();
  if (j.contains("max_tokens")) d.max_tokens = j.at("max_tokens").get<int>();
  if (j.contains("seed") && !j.at("seed").is_null()) d.seed = j.at("seed").get<long long>();
  if (d.temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (d.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  return d;
}

}  // namespace cdist
