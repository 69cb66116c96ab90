#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdist {

// Root of the library's exception hierarchy.  Callers that want blanket
// handling catch this; everything more specific derives from it.
struct Error : std::runtime_error {
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Bad or inconsistent run configuration (missing model entries, bad
// fractions, unknown enum strings, ...).  CLI maps this to exit code 3.
struct ConfigError : Error {
  using Error::Error;
};

// Credential missing/empty or endpoint refused authentication.
struct AuthError : Error {
  using Error::Error;
};

// Network-level failure after retries, or no HTTP transport configured.
struct TransportError : Error {
  using Error::Error;
};

// A mock-backed model received a conversation no fixture rule matches.
struct MockMissError : Error {
  using Error::Error;
};

// Dataset line failed to parse; carries the 1-based line number.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_no(line) {}
  std::size_t line_no;
};

struct DuplicateIdError : Error {
  using Error::Error;
};

struct EmptyDatasetError : Error {
  using Error::Error;
};

// A prompt template referenced {name} with no binding supplied.
struct MissingPlaceholderError : Error {
  explicit MissingPlaceholderError(const std::string& name)
      : Error("unbound placeholder {" + name + "}"), placeholder(name) {}
  std::string placeholder;
};

// update_prompt was handed a concept that never passed verification.
struct NonAcceptedConceptError : Error {
  using Error::Error;
};

// A model response contained no parseable list, even after one reprompt.
struct ListParseError : Error {
  using Error::Error;
};

// Probe selection could not assemble at least two usable probes.
struct InsufficientProbesError : Error {
  using Error::Error;
};

// The sandbox runner itself could not be launched (distinct from the
// submitted program failing, which is an ordinary incorrect verdict).
struct SandboxError : Error {
  using Error::Error;
};

}  // namespace cdist
