//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Bridge to an external synthesizer. The user supplies a shell command
// template with {in} and {out} placeholders; the bridge materializes the
// circuit as an aag file in a scratch directory, runs the command, parses
// the output file, and accepts the result only after a full truth-table
// equivalence check. Anything else — nonzero exit, timeout, unparseable or
// non-equivalent output — is an error, never a silent substitution.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/dataset.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <string>
#include <thread>

namespace aigen {

struct ExternalTool {
  std::string command;  // template containing {in} and {out}
  double timeout_sec = 60.0;
};

namespace detail {

inline void substitute_all(std::string& text, const std::string& key, const std::string& value) {
  for (size_t pos = 0; (pos = text.find(key, pos)) != std::string::npos; pos += value.size())
    text.replace(pos, key.size(), value);
}

/// Runs `command` through /bin/sh. Returns the exit status, or throws on
/// timeout after killing the child.
inline int run_with_timeout(const std::string& command, double timeout_sec) {
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("external tool: fork failed");
  if (pid == 0) {
    execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
    _exit(127);
  }
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_sec);
  int status = 0;
  while (true) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw std::runtime_error("external tool: waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(pid, SIGKILL);
      while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      throw std::runtime_error("external tool: timed out after " + std::to_string(timeout_sec) +
                               "s: " + command);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

inline std::filesystem::path make_scratch_dir() {
  static std::atomic<uint64_t> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  const uint64_t tag =
      uint64_t(getpid()) * 1000003 + counter.fetch_add(1, std::memory_order_relaxed);
  std::filesystem::path dir = base / ("aigen-tool-" + std::to_string(tag));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace detail

/// Runs the tool on `input` and returns its output circuit, already verified
/// equivalent. Throws on any failure, naming the offending template.
inline Aig run_external_tool(const ExternalTool& tool, const Aig& input) {
  if (tool.command.find("{in}") == std::string::npos ||
      tool.command.find("{out}") == std::string::npos)
    throw std::invalid_argument("external tool: template must contain {in} and {out}: " +
                                tool.command);

  const std::filesystem::path dir = detail::make_scratch_dir();
  const std::filesystem::path in_path = dir / "in.aag";
  const std::filesystem::path out_path = dir / "out.aag";
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  detail::write_text_file(in_path, write_aag(input));
  std::string command = tool.command;
  detail::substitute_all(command, "{in}", in_path.string());
  detail::substitute_all(command, "{out}", out_path.string());

  const int status = detail::run_with_timeout(command, tool.timeout_sec);
  if (status != 0)
    throw std::runtime_error("external tool: exited with status " + std::to_string(status) +
                             ": " + tool.command);
  if (!std::filesystem::exists(out_path))
    throw std::runtime_error("external tool: produced no output file: " + tool.command);

  Aig result = parse_aag(detail::read_text_file(out_path));
  if (result.n_inputs() != input.n_inputs() || result.n_outputs() != input.n_outputs())
    throw std::runtime_error("external tool: output signature mismatch: " + tool.command);
  const auto diff = first_table_diff(result.eval_truth_tables(), input.eval_truth_tables());
  if (diff)
    throw std::runtime_error("external tool: output differs from input at output " +
                             std::to_string(diff->first + 1) + " row " +
                             std::to_string(diff->second) + "; rejecting: " + tool.command);
  return result;
}

/// Supervision source backed by an external synthesizer.
inline std::function<Aig(const Aig&)> external_tool_target(ExternalTool tool) {
  return [tool = std::move(tool)](const Aig& original) { return run_external_tool(tool, original); };
}

}  // namespace aigen
