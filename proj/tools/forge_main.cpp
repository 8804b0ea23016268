#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forge/cli.hpp"
#include "forge/error.hpp"
#include "forge/textutil.hpp"
#include "forge/version.hpp"

namespace {

std::string path_str(const std::filesystem::path& p) { return p.string(); }

// key=value config support: file values become trailing flags, so anything
// given on the command line wins.
std::vector<std::string> merge_config_file(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw forge::config_error("cannot open config file " + config_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = forge::trim_view(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos)
      throw forge::config_error(config_path + ":" + std::to_string(line_no) +
                                ": expected key=value");
    const std::string key(forge::trim_view(trimmed.substr(0, eq)));
    const std::string value(forge::trim_view(trimmed.substr(eq + 1)));
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& arg : args)
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) given = true;
    if (given) continue;
    if (value == "true" || value == "false") {
      if (value == "true") args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus tooling for clinical-note pipelines: masked pre-training data,"
               " note selection, synthetic dialogue augmentation and ROUGE evaluation."};
  app.set_version_flag("--version", std::string(forge::kToolName) + " " + forge::kVersion);
  app.require_subcommand(1);

  forge::cli::PretrainBuildOptions pretrain;
  auto* pretrain_cmd =
      app.add_subcommand("pretrain-build", "Build sentinel-masked pre-training examples");
  pretrain_cmd->add_option("--config", "key=value file with defaults for these flags");
  pretrain_cmd->add_option("--docs", pretrain.docs, "documents.jsonl corpus")->required();
  pretrain_cmd->add_option("--lexicon", pretrain.lexicon, "term file, one phrase per line")
      ->required();
  pretrain_cmd->add_option("--ner", pretrain.ner, "annotations.jsonl from the external NER model")
      ->required();
  pretrain_cmd->add_option("--seed", pretrain.seed, "master seed")->required();
  pretrain_cmd->add_option("--out", pretrain.out, "masked.jsonl output path")->required();
  pretrain_cmd->add_option("--jobs", pretrain.jobs, "worker threads (default: all cores)");
  pretrain_cmd->add_flag("--combined", pretrain.combined,
                         "mask random sentences on top of entity spans");

  forge::cli::SelectOptions select;
  auto* select_cmd = app.add_subcommand("select", "Rank candidate notes by shared headers");
  select_cmd->add_option("--config", "key=value file with defaults for these flags");
  select_cmd->add_option("--candidates", select.candidates, "candidate documents.jsonl")
      ->required();
  select_cmd->add_option("--train-notes", select.train_notes,
                         "training notes used to curate the header list")
      ->required();
  select_cmd->add_option("--n", select.n, "number of candidates to select")->required();
  select_cmd->add_option("--out", select.out, "selection manifest output path")->required();

  forge::cli::AugmentOptions augment;
  auto* augment_cmd =
      app.add_subcommand("augment", "Generate and rank synthetic dialogues for notes");
  augment_cmd->add_option("--config", "key=value file with defaults for these flags");
  augment_cmd->add_option("--notes", augment.notes, "notes documents.jsonl")->required();
  augment_cmd->add_option("--endpoint-config", augment.endpoint_config,
                          "key=value chat endpoint settings")
      ->required();
  augment_cmd->add_option("--task", augment.task, "B or C (stage 2 runs for C only)")
      ->required();
  augment_cmd->add_option("--n", augment.n, "number of top-ranked dialogues to keep")
      ->required();
  augment_cmd->add_option("--exemplar", augment.exemplar,
                          "JSON file with the one-shot note/dialogue pair")
      ->required();
  augment_cmd->add_option("--out", augment.out, "dataset output path")->required();
  augment_cmd
      ->add_option("--resume", augment.resume,
                   "existing manifest; completed notes are not re-requested")
      ->expected(1);
  augment_cmd
      ->add_option("--train-refs", augment.train_refs,
                   "documents.jsonl of training dialogues for ranking (default: the exemplar)")
      ->expected(1);
  augment_cmd->add_option("--stage1-template", augment.stage1_template,
                          "override the stage-1 guideline text");
  augment_cmd->add_option("--stage2-template", augment.stage2_template,
                          "override the stage-2 filler instruction");
  augment_cmd->add_option("--rank-metric", augment.rank_metric,
                          "ranking similarity: r1, r2 or rl (default r1)");

  forge::cli::EvaluateOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions with ROUGE");
  evaluate_cmd->add_option("--config", "key=value file with defaults for these flags");
  evaluate_cmd->add_option("--pred", evaluate.pred, "predictions documents.jsonl")->required();
  evaluate_cmd->add_option("--ref", evaluate.ref, "references documents.jsonl")->required();
  evaluate_cmd->add_option("--tsv", evaluate.tsv, "also write the report as TSV")->expected(1);

  forge::cli::StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Token-length percentile of a corpus field");
  stats_cmd->add_option("--config", "key=value file with defaults for these flags");
  stats_cmd->add_option("--docs", stats.docs, "masked.jsonl or dataset JSONL")->required();
  stats_cmd->add_option("--field", stats.field, "input or target")->required();
  stats_cmd->add_option("--percentile", stats.percentile, "percentile in [1, 100]")->required();

  try {
    std::vector<std::string> args = merge_config_file(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? forge::cli::kExitOk : forge::cli::kExitUsage;
  } catch (const forge::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return forge::cli::kExitUsage;
  }

  try {
    if (pretrain_cmd->parsed()) {
      const auto result = forge::cli::run_pretrain_build(pretrain);
      std::cout << "documents " << result.documents << ", examples " << result.examples
                << ", skipped " << result.skipped << ", sentinels " << result.sentinels
                << ", dropped_spans " << result.dropped_spans << "\n";
      for (const auto& [policy, count] : result.policy_histogram)
        std::cout << "  " << policy << " " << count << "\n";
      std::cout << "wrote " << path_str(pretrain.out) << "\n";
    } else if (select_cmd->parsed()) {
      const auto result = forge::cli::run_select(select);
      std::cout << "candidates " << result.candidates << ", selected " << result.selected
                << ", lexicon headers " << result.lexicon_headers << "\n"
                << "wrote " << path_str(select.out) << "\n";
    } else if (augment_cmd->parsed()) {
      const auto result = forge::cli::run_augment(augment);
      if (result.truncated_notes > 0)
        std::cerr << "warning: " << result.truncated_notes
                  << " note(s) exceeded the input token limit and were truncated\n";
      std::cout << "notes " << result.notes << ", generated " << result.generated
                << ", resumed " << result.resumed << ", kept " << result.kept << "\n";
      for (const auto& [status, count] : result.status_histogram)
        std::cout << "  " << status << " " << count << "\n";
      std::cout << "wrote " << path_str(augment.out) << "\n";
    } else if (evaluate_cmd->parsed()) {
      forge::cli::run_evaluate(evaluate, std::cout);
    } else if (stats_cmd->parsed()) {
      std::cout << forge::cli::run_stats(stats) << "\n";
    }
  } catch (const forge::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return forge::cli::kExitUsage;
  } catch (const forge::endpoint_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return forge::cli::kExitEndpoint;
  } catch (const forge::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return forge::cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return forge::cli::kExitData;
  }
  return forge::cli::kExitOk;
}
