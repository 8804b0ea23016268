#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forge/types.hpp"

namespace forge {

// "Fully upper-cased" header line: every letter uppercase, at least
// min_letters letters, at most max_line_len characters after trimming.
struct HeaderRules {
  std::size_t min_letters = 2;
  std::size_t max_line_len = 60;
};

// Trim, strip one trailing colon, collapse internal whitespace.
std::string normalize_header(std::string_view line);

// Header lines in order, duplicates kept, trailing colon stripped.
std::vector<std::string> extract_headers(std::string_view note_text,
                                         const HeaderRules& rules = {});

// Normalized section headers with occurrence counts.
class HeaderLexicon {
 public:
  void add(const std::string& normalized, std::size_t count = 1);
  bool contains(const std::string& normalized) const;
  std::size_t count(const std::string& normalized) const;
  std::size_t size() const { return counts_.size(); }
  const std::map<std::string, std::size_t>& counts() const { return counts_; }

 private:
  std::map<std::string, std::size_t> counts_;
};

HeaderLexicon build_header_lexicon(const std::vector<Document>& notes,
                                   const HeaderRules& rules = {});

// Number of distinct lexicon headers appearing as header lines in the note.
std::size_t score_note(std::string_view note_text, const HeaderLexicon& lexicon,
                       const HeaderRules& rules = {});

struct ScoredCandidate {
  std::string doc_id;
  std::size_t score = 0;
  std::size_t rank = 0;  // 1-based, assigned by rank_candidates
};

struct SelectionConfig {
  std::size_t n = 0;
};

// Sort by (score descending, doc_id ascending) and assign ranks from 1.
std::vector<ScoredCandidate> rank_candidates(std::vector<ScoredCandidate> scored);

// First n of the ranked order; all candidates when fewer than n.
std::vector<ScoredCandidate> select_top_n(std::vector<ScoredCandidate> scored, std::size_t n);

// Every lexicon header line starts a section running to the next header or
// the end; text before the first header becomes a headerless preamble.
// Section ranges partition [0, note length).
std::vector<NoteSection> split_sections(std::string_view note_text, const HeaderLexicon& lexicon,
                                        const HeaderRules& rules = {});

}  // namespace forge
