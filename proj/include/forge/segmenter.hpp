#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Byte range of one sentence within its parent text.
struct Sentence {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
};

struct TruncationConfig {
  double percentile = 0.95;  // in (0, 1]
  std::optional<std::size_t> input_limit;
  std::optional<std::size_t> output_limit;
};

// The configured limit when set, else the percentile of the observed
// token lengths.
std::size_t resolve_token_limit(const TruncationConfig& config,
                                const std::vector<std::size_t>& observed_lengths,
                                bool output_side = false);

// Rule-based sentence boundary detection: a run of {. ! ?} followed by
// whitespace and an uppercase/digit start ends a sentence, unless the word
// ending in a single period is on the abbreviation guard list. A newline
// always ends a sentence.
class SentenceSplitter {
 public:
  SentenceSplitter();  // built-in clinical abbreviation list
  explicit SentenceSplitter(std::set<std::string> abbreviations);

  // Abbreviation file: one abbreviation per line, UTF-8.
  static SentenceSplitter from_file(const std::filesystem::path& path);

  std::vector<Sentence> split(std::string_view text) const;

  const std::set<std::string>& abbreviations() const { return abbreviations_; }

 private:
  std::set<std::string> abbreviations_;  // lowercased, trailing period kept
};

// split with the default splitter.
std::vector<Sentence> split_sentences(std::string_view text);

// Maximal runs of letters/digits (periods kept between digits, as in "37.5")
// are one token; every other non-whitespace character is its own token.
std::vector<Token> tokenize(std::string_view text);

std::vector<std::string> token_texts(std::string_view text);

std::size_t count_tokens(std::string_view text);

// Nearest-rank percentile: the ceil(p*n)-th smallest value. lengths must be
// non-empty, 0 < p <= 1.
std::size_t length_percentile(std::vector<std::size_t> lengths, double p);

// Cuts after the end of token #limit; identity when the text has <= limit
// tokens. limit >= 1.
std::string truncate_tokens(std::string_view text, std::size_t limit);

std::set<std::string> load_abbreviation_file(const std::filesystem::path& path);
const std::set<std::string>& default_abbreviations();

}  // namespace forge
