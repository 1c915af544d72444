#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Shared helpers for file-backed tests.

namespace testutil {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("fairfuse_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const TempDir& dir, const std::string& args) {
  const std::string out_path = dir.file("__stdout.txt");
  const std::string err_path = dir.file("__stderr.txt");
  const std::string cmd = std::string(FAIRFUSE_CLI_PATH) + " " + args + " > " + out_path +
                          " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read(out_path);
  r.err = read(err_path);
  return r;
}

}  // namespace testutil
