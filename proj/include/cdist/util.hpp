#pragma once

// Small string / filesystem / concurrency helpers shared across the library.

#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "cdist/errors.hpp"

namespace cdist {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// ASCII-only casefold; the corpora this library targets are ASCII-dominant
// and judging must stay deterministic across locales.
inline std::string casefold(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Collapses every whitespace run to a single space and trims the edges.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_gap = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_gap = !out.empty();
      continue;
    }
    if (pending_gap) out += ' ';
    pending_gap = false;
    out += c;
  }
  return out;
}

// Canonical comparison form: casefolded, whitespace-collapsed, trimmed.
inline std::string normalize_text(std::string_view s) {
  return collapse_whitespace(casefold(s));
}

// Maximal alphanumeric runs, casefolded — the token set used for overlap
// similarity between questions and for matching refined concepts back to
// their sources.
inline std::set<std::string> word_tokens(std::string_view s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Shortest round-trip decimal form of a double ("0.8", not "0.800000").
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// FNV-1a, used where a hash must be stable across builds and platforms
// (std::hash makes no such promise).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so concurrent readers never observe a torn file.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view content) {
  namespace fs = std::filesystem;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  static std::atomic<unsigned> counter{0};
  fs::path tmp = p;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1)) + "-" +
         std::to_string(static_cast<unsigned long long>(
             std::hash<std::thread::id>{}(std::this_thread::get_id()) & 0xffff));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename into place: " + p.string());
  }
}

// Counting gate bounding how many threads occupy a section at once.
class Limiter {
 public:
  explicit Limiter(int limit) : limit_(limit > 0 ? limit : 1) {}

  void acquire() {
    std::unique_lock<std::mutex> lk(mu_);
    cv_.wait(lk, [&] { return active_ < limit_; });
    ++active_;
  }

  void release() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      --active_;
    }
    cv_.notify_one();
  }

  class Guard {
   public:
    explicit Guard(Limiter& l) : l_(l) { l_.acquire(); }
    ~Guard() { l_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    Limiter& l_;
  };

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int limit_;
  int active_ = 0;
};

// Runs fn(0..n-1) across at most max_threads workers; rethrows the first
// exception after all workers join.
inline void parallel_for(std::size_t n, int max_threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int workers = max_threads < 1 ? 1 : max_threads;
  if (static_cast<std::size_t>(workers) > n) workers = static_cast<int>(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cdist
