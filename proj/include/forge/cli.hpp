#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "forge/masking.hpp"
#include "forge/types.hpp"

namespace forge::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEndpoint = 3;

struct PretrainBuildOptions {
  std::filesystem::path docs;
  std::filesystem::path lexicon;
  std::filesystem::path ner;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0: hardware concurrency
  bool combined = false;
};

struct PretrainBuildStats {
  std::size_t documents = 0;
  std::size_t examples = 0;
  std::size_t skipped = 0;
  std::size_t sentinels = 0;
  std::size_t dropped_spans = 0;
  std::map<std::string, std::size_t> policy_histogram;
};

PretrainBuildStats run_pretrain_build(const PretrainBuildOptions& options);

struct SelectOptions {
  std::filesystem::path candidates;
  std::filesystem::path train_notes;
  std::size_t n = 0;
  std::filesystem::path out;
};

struct SelectStats {
  std::size_t candidates = 0;
  std::size_t selected = 0;
  std::size_t lexicon_headers = 0;
};

SelectStats run_select(const SelectOptions& options);

struct AugmentOptions {
  std::filesystem::path notes;
  std::filesystem::path endpoint_config;
  std::string task = "B";
  std::size_t n = 0;
  std::filesystem::path exemplar;
  std::filesystem::path out;
  std::optional<std::filesystem::path> resume;
  std::optional<std::filesystem::path> train_refs;
  std::optional<std::filesystem::path> stage1_template;
  std::optional<std::filesystem::path> stage2_template;
  std::string rank_metric = "r1";  // r1 | r2 | rl
};

struct AugmentStats {
  std::size_t notes = 0;
  std::size_t generated = 0;
  std::size_t resumed = 0;
  std::size_t kept = 0;
  std::size_t truncated_notes = 0;
  std::map<std::string, std::size_t> status_histogram;
};

AugmentStats run_augment(const AugmentOptions& options);

struct EvaluateOptions {
  std::filesystem::path pred;
  std::filesystem::path ref;
  std::optional<std::filesystem::path> tsv;
};

MetricReport run_evaluate(const EvaluateOptions& options, std::ostream& out);

struct StatsOptions {
  std::filesystem::path docs;
  std::string field = "input";  // "input" | "target"
  int percentile = 95;          // 1..100
};

std::size_t run_stats(const StatsOptions& options);

}  // namespace forge::cli
