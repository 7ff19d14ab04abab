#pragma once

// Drives the upgrade-lens executable for integration checks.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "upgrade_lens/io.hpp"

namespace pipeline {

namespace fs = std::filesystem;

inline const std::string kCli = ULENS_CLI;
inline const std::string kFixtures = ULENS_FIXTURES;

struct Run {
  int exit_code = -1;
  std::string err;
};

inline std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

/// Runs the CLI with `args`; `env` is prepended as VAR=value assignments.
inline Run cli(const std::vector<std::string>& args, const std::string& env = "") {
  static int counter = 0;
  const auto err_file = fs::temp_directory_path() / ("ulens_err_" + std::to_string(::getpid()) + "_" +
                                                     std::to_string(counter++) + ".txt");
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += quote(kCli);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >/dev/null 2>" + quote(err_file.string());
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = ulens::io::read_text(err_file.string());
  fs::remove(err_file);
  return r;
}

inline fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ulens_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// extract both versions, diff, metrics and score into `out`. Returns the
/// first failing step's exit code, or 0.
inline int run_e2e(const fs::path& out) {
  const auto e2e = kFixtures + "/e2e";
  const auto o = [&](const char* sub) { return (out / sub).string(); };
  const std::vector<std::vector<std::string>> steps{
      {"extract", e2e + "/v1", "--out", o("v1")},
      {"extract", e2e + "/v2", "--out", o("v2")},
      {"diff", "--base", o("v1/graph.jsonl"), "--upgraded", o("v2/graph.jsonl"), "--base-digests",
       o("v1/digests.csv"), "--upgraded-digests", o("v2/digests.csv"), "--diagnostics", e2e + "/diagnostics.csv",
       "--out", o("diff")},
      {"metrics", o("diff/upgraded_marked.jsonl"), "--out", o("metrics")},
      {"score", o("diff/upgraded_marked.jsonl"), "--out", o("score")},
  };
  for (const auto& s : steps)
    if (const auto r = cli(s); r.exit_code != 0) return r.exit_code;
  return 0;
}

/// Relative path -> contents for every regular file below `root`.
inline std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      files[fs::relative(e.path(), root).generic_string()] = ulens::io::read_text(e.path().string());
  return files;
}

}  // namespace pipeline
