#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "forge/types.hpp"

namespace forge {

// Normalized term phrases for the built-in matcher. A phrase is stored as
// its canonical key: the phrase's tokens, lowercased, joined with single
// spaces (normalization collapses whitespace first).
class TermLexicon {
 public:
  static TermLexicon from_phrases(const std::vector<std::string>& raw_phrases);

  bool contains_key(const std::string& key) const { return keys_.count(key) != 0; }
  std::size_t size() const { return keys_.size(); }
  std::size_t max_phrase_len() const { return max_phrase_len_; }
  const std::unordered_set<std::string>& keys() const { return keys_; }

 private:
  std::unordered_set<std::string> keys_;
  std::size_t max_phrase_len_ = 0;  // in tokens
};

// Term file: one surface form per line. Duplicates collapse after
// normalization; an empty lexicon is an error.
TermLexicon build_lexicon(const std::filesystem::path& term_file);

// Greedy left-to-right longest match over document tokens, case-insensitive.
// Returned spans are sorted, non-overlapping, source = LexiconMatch, label =
// the matched canonical phrase.
std::vector<AnnotationSpan> annotate_lexicon(const Document& doc, const TermLexicon& lexicon);

// Output of an external NER model, keyed by document id. Spans are only
// validated against their document when merged into a corpus run.
struct NerFile {
  std::map<std::string, std::vector<AnnotationSpan>> by_doc;

  const std::vector<AnnotationSpan>* find(const std::string& doc_id) const {
    auto it = by_doc.find(doc_id);
    return it == by_doc.end() ? nullptr : &it->second;
  }
};

// annotations.jsonl: {"doc_id": str, "spans": [{"start": int, "end": int,
// "label": str, "source": "lexicon"|"ner"}]}. Source is forced to
// ExternalNer on load.
NerFile load_ner_annotations(const std::filesystem::path& path);

std::size_t write_ner_annotations(const NerFile& ner, const std::filesystem::path& path);

// Coalesces overlapping or adjacent spans of the same source; labels of
// merged spans are joined with "+". Input is sorted internally.
std::vector<AnnotationSpan> merge_overlapping(std::vector<AnnotationSpan> spans);

}  // namespace forge
