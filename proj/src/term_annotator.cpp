#include "forge/term_annotator.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "forge/error.hpp"
#include "forge/segmenter.hpp"
#include "forge/textutil.hpp"

namespace forge {

using njson = nlohmann::ordered_json;

namespace {

// Canonical key of a phrase: lowercase, tokenize, join with single spaces.
std::string phrase_key(std::string_view phrase, std::size_t* token_count = nullptr) {
  const std::string lowered = to_lower_ascii(collapse_whitespace(trim_view(phrase)));
  std::string key;
  std::size_t count = 0;
  for (const Token& t : tokenize(lowered)) {
    if (!key.empty()) key.push_back(' ');
    key.append(lowered, t.start, t.end - t.start);
    ++count;
  }
  if (token_count) *token_count = count;
  return key;
}

}  // namespace

TermLexicon TermLexicon::from_phrases(const std::vector<std::string>& raw_phrases) {
  TermLexicon lex;
  for (const std::string& raw : raw_phrases) {
    std::size_t token_count = 0;
    std::string key = phrase_key(raw, &token_count);
    if (key.empty()) continue;
    lex.keys_.insert(std::move(key));
    lex.max_phrase_len_ = std::max(lex.max_phrase_len_, token_count);
  }
  return lex;
}

TermLexicon build_lexicon(const std::filesystem::path& term_file) {
  std::ifstream in(term_file, std::ios::binary);
  if (!in) throw data_error("cannot open term file " + term_file.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim_view(line).empty()) phrases.push_back(line);
  }
  TermLexicon lex = TermLexicon::from_phrases(phrases);
  if (lex.size() == 0)
    throw data_error("term file " + term_file.string() + " contains no phrases");
  return lex;
}

std::vector<AnnotationSpan> annotate_lexicon(const Document& doc, const TermLexicon& lexicon) {
  std::vector<AnnotationSpan> spans;
  if (lexicon.size() == 0 || lexicon.max_phrase_len() == 0) return spans;

  const std::vector<Token> tokens = tokenize(doc.text);
  std::vector<std::string> lowered(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    lowered[i] = to_lower_ascii(
        std::string_view(doc.text).substr(tokens[i].start, tokens[i].end - tokens[i].start));

  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t longest = std::min(lexicon.max_phrase_len(), tokens.size() - i);
    bool matched = false;
    for (std::size_t len = longest; len >= 1; --len) {
      std::string key = lowered[i];
      for (std::size_t k = 1; k < len; ++k) {
        key.push_back(' ');
        key += lowered[i + k];
      }
      if (lexicon.contains_key(key)) {
        spans.push_back({tokens[i].start, tokens[i + len - 1].end, std::move(key),
                         SpanSource::LexiconMatch});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return spans;
}

NerFile load_ner_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  NerFile ner;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    njson record;
    try {
      record = njson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(where + ": malformed JSON line: " + e.what());
    }
    try {
      const auto doc_id = record.at("doc_id").get<std::string>();
      auto& spans = ner.by_doc[doc_id];
      for (const auto& s : record.at("spans")) {
        AnnotationSpan span;
        const auto start = s.at("start").get<long long>();
        const auto end = s.at("end").get<long long>();
        if (start < 0 || end <= start)
          throw data_error(where + ": invalid span [" + std::to_string(start) + ", " +
                           std::to_string(end) + ") for doc \"" + doc_id + "\"");
        span.start = static_cast<std::size_t>(start);
        span.end = static_cast<std::size_t>(end);
        span.label = s.value("label", std::string{});
        span.source = SpanSource::ExternalNer;
        spans.push_back(std::move(span));
      }
    } catch (const nlohmann::json::exception& e) {
      throw data_error(where + ": bad record: " + e.what());
    }
  }
  return ner;
}

std::size_t write_ner_annotations(const NerFile& ner, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  for (const auto& [doc_id, spans] : ner.by_doc) {
    njson record;
    record["doc_id"] = doc_id;
    record["spans"] = njson::array();
    for (const AnnotationSpan& s : spans)
      record["spans"].push_back({{"start", s.start},
                                 {"end", s.end},
                                 {"label", s.label},
                                 {"source", to_string(s.source)}});
    out << record.dump() << '\n';
  }
  out.flush();
  if (!out) throw data_error("write failed for " + path.string());
  return ner.by_doc.size();
}

std::vector<AnnotationSpan> merge_overlapping(std::vector<AnnotationSpan> spans) {
  std::stable_sort(spans.begin(), spans.end(), [](const AnnotationSpan& a, const AnnotationSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<AnnotationSpan> merged;
  for (AnnotationSpan& span : spans) {
    if (!merged.empty() && merged.back().source == span.source &&
        span.start <= merged.back().end) {
      AnnotationSpan& last = merged.back();
      last.end = std::max(last.end, span.end);
      last.label += "+" + span.label;
      continue;
    }
    merged.push_back(std::move(span));
  }
  return merged;
}

}  // namespace forge
