#include "forge/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "forge/error.hpp"
#include "forge/textutil.hpp"

namespace forge {

namespace {

bool is_sentence_punct(char c) { return c == '.' || c == '!' || c == '?'; }

// Word ending at the punctuation run [word_end_excl - 1], scanned back over
// non-whitespace bytes.
std::string_view word_ending_at(std::string_view text, std::size_t word_end_excl) {
  std::size_t begin = word_end_excl;
  while (begin > 0 && !is_space_byte(static_cast<unsigned char>(text[begin - 1]))) --begin;
  return text.substr(begin, word_end_excl - begin);
}

const char* kDefaultAbbreviations[] = {
    "dr.",   "mr.",   "mrs.",  "ms.",    "prof.", "st.",    "jr.",   "sr.",
    "vs.",   "etc.",  "e.g.",  "i.e.",   "cf.",   "approx.", "no.",  "fig.",
    "dept.", "inc.",  "mg.",   "mcg.",   "ml.",   "dl.",    "kg.",   "lb.",
    "oz.",   "hr.",   "min.",  "sec.",   "wk.",   "mo.",    "yr.",   "b.i.d.",
    "t.i.d.", "q.i.d.", "q.d.", "p.r.n.", "p.o.", "a.m.",   "p.m.",  "tab.",
    "cap.",  "rx.",   "dx.",   "hx.",    "fx.",   "tx.",    "pt.",   "amt.",
};

}  // namespace

const std::set<std::string>& default_abbreviations() {
  static const std::set<std::string> abbreviations(std::begin(kDefaultAbbreviations),
                                                   std::end(kDefaultAbbreviations));
  return abbreviations;
}

std::set<std::string> load_abbreviation_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open abbreviation file " + path.string());
  std::set<std::string> abbreviations;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view trimmed = trim_view(line);
    if (trimmed.empty()) continue;
    abbreviations.insert(to_lower_ascii(trimmed));
  }
  return abbreviations;
}

SentenceSplitter::SentenceSplitter() : abbreviations_(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(std::set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

SentenceSplitter SentenceSplitter::from_file(const std::filesystem::path& path) {
  return SentenceSplitter(load_abbreviation_file(path));
}

std::vector<Sentence> SentenceSplitter::split(std::string_view text) const {
  std::vector<Sentence> sentences;
  const std::size_t n = text.size();
  std::size_t sent_start = n;  // n means "no open sentence"
  std::size_t sent_end = 0;    // one past the last non-whitespace byte seen

  auto emit = [&](std::size_t end) {
    if (sent_start >= end) return;
    sentences.push_back({sentences.size(), sent_start, end});
    sent_start = n;
  };

  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      emit(sent_end);
      ++i;
      continue;
    }
    if (is_space_byte(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (sent_start == n) sent_start = i;
    if (is_sentence_punct(c)) {
      std::size_t run_end = i;
      while (run_end < n && is_sentence_punct(text[run_end])) ++run_end;
      sent_end = run_end;
      bool boundary = false;
      if (run_end >= n) {
        boundary = true;
      } else if (is_space_byte(static_cast<unsigned char>(text[run_end]))) {
        std::size_t next = run_end;
        while (next < n && is_space_byte(static_cast<unsigned char>(text[next]))) ++next;
        boundary = next >= n || is_upper_byte(static_cast<unsigned char>(text[next])) ||
                   is_digit_byte(static_cast<unsigned char>(text[next]));
      }
      if (boundary && run_end == i + 1 && c == '.') {
        std::string word = to_lower_ascii(word_ending_at(text, run_end));
        if (abbreviations_.count(word)) boundary = false;
      }
      if (boundary) {
        emit(run_end);
        i = run_end;
        continue;
      }
      i = run_end;
      continue;
    }
    ++i;
    sent_end = i;
  }
  emit(sent_end);
  return sentences;
}

std::vector<Sentence> split_sentences(std::string_view text) {
  static const SentenceSplitter splitter;
  return splitter.split(text);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space_byte(c)) {
      ++i;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < n) {
        const unsigned char d = static_cast<unsigned char>(text[j]);
        if (is_word_byte(d)) {
          ++j;
          continue;
        }
        if (d == '.' && j + 1 < n && is_digit_byte(static_cast<unsigned char>(text[j - 1])) &&
            is_digit_byte(static_cast<unsigned char>(text[j + 1]))) {
          j += 2;
          continue;
        }
        break;
      }
      tokens.push_back({i, j});
      i = j;
      continue;
    }
    tokens.push_back({i, i + 1});
    ++i;
  }
  return tokens;
}

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(text)) out.emplace_back(text.substr(t.start, t.end - t.start));
  return out;
}

std::size_t count_tokens(std::string_view text) { return tokenize(text).size(); }

std::size_t length_percentile(std::vector<std::size_t> lengths, double p) {
  if (lengths.empty()) throw data_error("length_percentile: empty input");
  if (!(p > 0.0 && p <= 1.0)) throw config_error("percentile must be in (0, 1]");
  std::sort(lengths.begin(), lengths.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(lengths.size())));
  rank = std::clamp<std::size_t>(rank, 1, lengths.size());
  return lengths[rank - 1];
}

std::size_t resolve_token_limit(const TruncationConfig& config,
                                const std::vector<std::size_t>& observed_lengths,
                                bool output_side) {
  const auto& fixed = output_side ? config.output_limit : config.input_limit;
  if (fixed) {
    if (*fixed == 0) throw config_error("token limit must be >= 1");
    return *fixed;
  }
  return length_percentile(observed_lengths, config.percentile);
}

std::string truncate_tokens(std::string_view text, std::size_t limit) {
  if (limit == 0) throw config_error("token limit must be >= 1");
  const std::vector<Token> tokens = tokenize(text);
  if (tokens.size() <= limit) return std::string(text);
  return std::string(text.substr(0, tokens[limit - 1].end));
}

}  // namespace forge
