#pragma once

// Hand-built judging oracles shared by the unit suite and the acceptance
// binary.  The numeric table covers marker handling, currency/comma
// stripping, decimals, signs, fallback extraction, and documented edge
// behavior; the code table covers pass/fail/syntax-error/timeout paths.

#include <cdist/cdist.hpp>

#include <string>
#include <vector>

namespace testsupport {

struct NumericJudgeCase {
  const char* output;
  double truth;
  cdist::Verdict want;
  const char* extracted;  // nullptr => expect no extraction
};

inline const std::vector<NumericJudgeCase>& numeric_judge_cases() {
  using cdist::Verdict;
  static const double third = 1.0 / 3.0;
  static const std::vector<NumericJudgeCase> cases = {
      // markers
      {"#### 42", 42, Verdict::correct, "42"},
      {"The answer: 18 is final", 18, Verdict::correct, "18"},
      {"Answer: 18", 18, Verdict::correct, "18"},
      {"ANSWER:18", 18, Verdict::correct, "18"},
      {"x #### 5 and answer: 7", 7, Verdict::correct, "7"},  // later marker wins
      {"answer: 7 then #### 5", 5, Verdict::correct, "5"},
      {"#### 42 #### 43", 43, Verdict::correct, "43"},  // last marker occurrence
      {"100 200 answer: 150 done", 150, Verdict::correct, "150"},
      {"Step 1: 10\nStep 2: 20\n#### 30", 30, Verdict::correct, "30"},
      {"answer:   \n  99", 99, Verdict::correct, "99"},
      // commas and currency
      {"#### 1,234,567", 1234567, Verdict::correct, "1234567"},
      {"total is #### $1,234.56", 1234.56, Verdict::correct, "1234.56"},
      {"It costs \xE2\x82\xAC"
       "100 in total",
       100, Verdict::correct, "100"},
      {"Price: \xC2\xA3"
       "2,000",
       2000, Verdict::correct, "2000"},
      {"You owe $18.50", 18.5, Verdict::correct, "18.50"},
      {"answer: -$3", -3, Verdict::correct, "-3"},
      {"2, items", 2, Verdict::correct, "2"},  // trailing comma is punctuation
      {",5 start", 5, Verdict::correct, "5"},  // leading comma is not part of the token
      {"answer: 1,2", 12, Verdict::correct, "12"},  // commas inside digit runs are thousands
      // decimals and signs
      {"#### -7", -7, Verdict::correct, "-7"},
      {"answer: -2.5", -2.5, Verdict::correct, "-2.5"},
      {"answer: +5", 5, Verdict::correct, "+5"},
      {"The result is 42.", 42, Verdict::correct, "42"},  // sentence period excluded
      {"value 42.5. done", 42.5, Verdict::correct, "42.5"},
      {"answer: 5.", 5, Verdict::correct, "5"},
      {"007", 7, Verdict::correct, "007"},
      {"negative -0 case", 0, Verdict::correct, "-0"},
      {"-5 and -6", -6, Verdict::correct, "-6"},
      // fallback: last number anywhere when no marker (or an empty tail)
      {"I bought 3 apples and 4 pears", 4, Verdict::correct, "4"},
      {"The year 2024, then 2025.", 2025, Verdict::correct, "2025"},
      {"9 was my guess. answer: unknown", 9, Verdict::correct, "9"},
      {"a1b2c3", 3, Verdict::correct, "3"},
      {"3/4 of the cake", 4, Verdict::correct, "4"},  // fractions are two tokens
      {"1e3", 3, Verdict::correct, "3"},              // exponents are not supported
      // tolerance boundary (abs tol 1e-6)
      {"#### 100.000001", 100, Verdict::correct, "100.000001"},
      {"#### 100.00001", 100, Verdict::incorrect, "100.00001"},
      {"#### 0.33333333", third, Verdict::correct, "0.33333333"},
      // wrong values and misses
      {"I bought 3 apples and 4 pears", 3, Verdict::incorrect, "4"},
      {"answer: .5 probably", 0.5, Verdict::incorrect, "5"},  // bare leading dot unsupported
      {"no digits here", 1, Verdict::incorrect, nullptr},
      {"", 0, Verdict::incorrect, nullptr},
      {"#### seven", 7, Verdict::incorrect, nullptr},
  };
  return cases;
}

struct CodeJudgeCase {
  const char* label;
  std::string output;       // model output, possibly fenced
  std::string tests;        // assertion suite
  std::string entry_point;  // non-empty only for check()-driven suites
  cdist::Verdict want;
  bool expect_timeout = false;  // the one case allowed to run into the limit
};

inline std::vector<CodeJudgeCase> code_judge_cases() {
  using cdist::Verdict;
  return {
      {"pass-unfenced", "def add(a, b):\n    return a + b", "assert add(2, 3) == 5", "",
       Verdict::correct},
      {"pass-fenced-python",
       "Here you go:\n```python\ndef add(a, b):\n    return a + b\n```\nHope that helps.",
       "assert add(2, 3) == 5", "", Verdict::correct},
      {"pass-fenced-plain", "```\ndef add(a, b):\n    return a + b\n```",
       "assert add(1, 1) == 2", "", Verdict::correct},
      {"first-fence-wins",
       "```python\ndef add(a, b):\n    return a + b\n```\nor maybe\n```python\ndef add(a, b):\n"
       "    return a - b\n```",
       "assert add(2, 2) == 4", "", Verdict::correct},
      {"exit-zero-without-assertions", "def noop():\n    return None", "noop()", "",
       Verdict::correct},
      {"failing-assert", "def add(a, b):\n    return a - b", "assert add(2, 3) == 5", "",
       Verdict::incorrect},
      {"syntax-error", "def add(a, b)\n    return a + b", "assert add(2, 3) == 5", "",
       Verdict::incorrect},
      {"raises-at-import", "raise ValueError('boom')", "assert True", "", Verdict::incorrect},
      {"check-entry-pass", "def double(x):\n    return 2 * x",
       "def check(candidate):\n    assert candidate(3) == 6", "double", Verdict::correct},
      {"check-entry-fail", "def double(x):\n    return 3 * x",
       "def check(candidate):\n    assert candidate(3) == 6", "double", Verdict::incorrect},
      {"infinite-loop-times-out", "def add(a, b):\n    while True:\n        pass",
       "assert add(1, 1) == 2", "", Verdict::error, true},
  };
}

}  // namespace testsupport
