#pragma once

// Minimal process sandbox for judging code submissions: fresh process
// group, scrubbed environment, temp working directory, optional address
// space cap, hard wall-clock deadline enforced with SIGKILL on the group.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "cdist/errors.hpp"
#include "cdist/util.hpp"

namespace cdist {

struct SandboxConfig {
  std::string runner = "python3";
  int timeout_ms = 10000;
  int memory_mb = 512;  // 0 disables the address-space cap
  int concurrency = 2;  // enforced by the caller-supplied Limiter

  bool operator==(const SandboxConfig&) const = default;
};

struct SandboxResult {
  int exit_code = -1;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string stdout_text;
  std::string stderr_text;
};

namespace detail {

constexpr std::size_t kMaxCapturedBytes = 64 * 1024;

inline void append_capped(std::string& dst, const char* buf, ssize_t n) {
  if (n <= 0 || dst.size() >= kMaxCapturedBytes) return;
  std::size_t room = kMaxCapturedBytes - dst.size();
  dst.append(buf, static_cast<std::size_t>(n) < room ? static_cast<std::size_t>(n) : room);
}

inline std::filesystem::path fresh_sandbox_dir() {
  static std::atomic<unsigned long> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("cdist-sbx-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace detail

// Writes `program_text` to main.py in a fresh temp dir and executes it with
// the configured runner.  Returns within timeout_ms plus kill/reap slack.
// A runner that cannot be spawned sets spawn_failed (the caller maps that
// to an error verdict, not a wrong answer).
inline SandboxResult run_sandboxed(const SandboxConfig& cfg, const std::string& program_text) {
  namespace fs = std::filesystem;
  SandboxResult result;
  fs::path dir = detail::fresh_sandbox_dir();
  fs::path script = dir / "main.py";
  write_file_atomic(script, program_text);

  int out_pipe[2], err_pipe[2], status_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) throw SandboxError("pipe() failed");
  if (pipe2(status_pipe, O_CLOEXEC) != 0) throw SandboxError("pipe2() failed");

  // argv/envp prepared before fork: only async-signal-safe calls after.
  std::string runner = cfg.runner;
  std::string script_name = "main.py";
  std::vector<char*> argv = {runner.data(), script_name.data(), nullptr};
  std::vector<std::string> env_store;
  const char* pass_through[] = {"PATH", "LANG", "LC_ALL"};
  for (const char* name : pass_through) {
    if (const char* v = ::getenv(name)) env_store.push_back(std::string(name) + "=" + v);
  }
  env_store.push_back("HOME=" + dir.string());
  env_store.push_back("TMPDIR=" + dir.string());
  env_store.push_back("PYTHONDONTWRITEBYTECODE=1");
  env_store.push_back("PYTHONIOENCODING=utf-8");
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::string workdir = dir.string();

  pid_t pid = fork();
  if (pid < 0) throw SandboxError("fork() failed");
  if (pid == 0) {
    setpgid(0, 0);
    if (chdir(workdir.c_str()) != 0) _exit(126);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    close(status_pipe[0]);
    if (cfg.memory_mb > 0) {
      rlimit lim;
      lim.rlim_cur = lim.rlim_max = static_cast<rlim_t>(cfg.memory_mb) * 1024 * 1024;
      setrlimit(RLIMIT_AS, &lim);
    }
    execvpe(argv[0], argv.data(), envp.data());
    // exec failed: report errno through the CLOEXEC status pipe.
    int err = errno;
    ssize_t ignored = write(status_pipe[1], &err, sizeof(err));
    (void)ignored;
    _exit(127);
  }

  setpgid(pid, pid);  // mirror the child's call so the group kill never races
  close(out_pipe[1]);
  close(err_pipe[1]);
  close(status_pipe[1]);

  // Exec handshake: EOF means exec succeeded, bytes carry the errno.
  int exec_errno = 0;
  ssize_t sn = read(status_pipe[0], &exec_errno, sizeof(exec_errno));
  close(status_pipe[0]);
  if (sn > 0) {
    result.spawn_failed = true;
    result.stderr_text = "cannot run '" + cfg.runner + "': " + std::strerror(exec_errno);
  }

  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg.timeout_ms);
  struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  bool open_fd[2] = {true, true};
  char buf[4096];
  while (open_fd[0] || open_fd[1]) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                         deadline - std::chrono::steady_clock::now())
                         .count();
    if (remaining <= 0 && !result.spawn_failed) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      break;
    }
    fds[0].fd = open_fd[0] ? out_pipe[0] : -1;
    fds[1].fd = open_fd[1] ? err_pipe[0] : -1;
    int rc = poll(fds, 2, remaining > 0 ? static_cast<int>(remaining > 200 ? 200 : remaining) : 0);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int k = 0; k < 2; ++k) {
      if (!open_fd[k] || !(fds[k].revents & (POLLIN | POLLHUP))) continue;
      ssize_t n = read(fds[k].fd, buf, sizeof(buf));
      if (n > 0) {
        detail::append_capped(k == 0 ? result.stdout_text : result.stderr_text, buf, n);
      } else {
        open_fd[k] = false;
      }
    }
  }
  close(out_pipe[0]);
  close(err_pipe[0]);

  int status = 0;
  if (result.timed_out) {
    // The group was killed; reap without blocking forever.
    waitpid(pid, &status, 0);
    result.exit_code = -1;
  } else {
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.exit_code = 128 + WTERMSIG(status);
    }
  }
  kill(-pid, SIGKILL);  // sweep any stray grandchildren

  std::error_code ec;
  fs::remove_all(dir, ec);
  return result;
}

}  // namespace cdist
