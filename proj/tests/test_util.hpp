#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>

#include "forge/error.hpp"

namespace forge::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("forge_test_" + std::to_string(::getpid()) + "_" + std::to_string(rd()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw data_error("test fixture write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("test fixture read failed: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Random UTF-8 with multi-byte characters mixed in.
inline std::string random_utf8(std::mt19937_64& rng, std::size_t n_pieces) {
  static const std::vector<std::string> pieces = {
      "a", "b", "Z", "7", " ", "  ", ".", ",", "!", "?", "\n", "-", "(", ")",
      "fever", "cough", "note", "plan", "é", "µg", "€", "漢字",
      "\U0001F600", "naïve",
  };
  std::string out;
  for (std::size_t i = 0; i < n_pieces; ++i)
    out += pieces[static_cast<std::size_t>(rng() % pieces.size())];
  return out;
}

// Word-salad sentence of plain ASCII words, capitalized, "." terminated.
inline std::string random_sentence(std::mt19937_64& rng, std::size_t n_words) {
  static const std::vector<std::string> words = {
      "patient", "denies", "fever",  "cough",  "reports", "chronic", "pain", "stable",
      "plan",    "follow", "clinic", "review", "daily",   "oral",    "dose", "mild",
  };
  std::string out;
  for (std::size_t i = 0; i < n_words; ++i) {
    std::string w = words[static_cast<std::size_t>(rng() % words.size())];
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (!out.empty()) out += " ";
    out += w;
  }
  out += ".";
  return out;
}

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

// Runs a shell command, capturing stdout+stderr.
inline CmdResult run_cmd(const std::string& cmd) {
  CmdResult result;
  const std::string full = cmd + " 2>&1";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) return result;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = ::fread(buffer, 1, sizeof(buffer), pipe)) > 0)
    result.output.append(buffer, got);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

inline std::string shq(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace forge::test
