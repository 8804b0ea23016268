#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/types.hpp"

namespace forge {

enum class RougeVariant { R1, R2, RL, RLSum };

std::string to_string(RougeVariant v);
RougeVariant rouge_variant_from_string(const std::string& s);

struct EvalPair {
  std::string id;
  std::string candidate;
  std::string reference;
};

// Standard ROUGE preprocessing: rule-based tokens, lowercased, punctuation
// tokens dropped. No stemming.
std::vector<std::string> rouge_tokens(std::string_view text);

// All contiguous n-grams with multiplicity; tokens are lowercased first.
std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                          std::size_t n);

ScoreTriple rouge_n(std::string_view candidate, std::string_view reference, std::size_t n);
ScoreTriple rouge_l(std::string_view candidate, std::string_view reference);
ScoreTriple rouge_lsum(std::string_view candidate, std::string_view reference);
ScoreTriple rouge_score(std::string_view candidate, std::string_view reference, RougeVariant v);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Macro average (arithmetic mean of per-pair P/R/F1). Pairs must be
// non-empty with unique ids.
MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs);

// Aligned text table, metrics as columns in the order R1 R2 RL RLSum.
std::string format_report_table(const MetricReport& report);
// One header and one value row; columns <metric>_{precision,recall,f1}.
std::string format_report_tsv(const MetricReport& report);

}  // namespace forge
