#include "forge/sectionizer.hpp"

#include <algorithm>
#include <set>

#include "forge/textutil.hpp"

namespace forge {

namespace {

struct Line {
  std::size_t start = 0;  // offset of the first byte
  std::size_t end = 0;    // offset one past the last byte, excluding '\n'
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      if (i > start || i < text.size()) lines.push_back({start, i});
      start = i + 1;
    }
  }
  return lines;
}

bool is_header_line(std::string_view line, const HeaderRules& rules) {
  const std::string_view trimmed = trim_view(line);
  if (trimmed.empty() || trimmed.size() > rules.max_line_len) return false;
  std::size_t letters = 0;
  for (char c : trimmed) {
    const auto b = static_cast<unsigned char>(c);
    if (is_lower_byte(b)) return false;
    if (is_upper_byte(b)) ++letters;
  }
  return letters >= rules.min_letters;
}

std::string strip_trailing_colon(std::string_view trimmed) {
  if (!trimmed.empty() && trimmed.back() == ':') trimmed.remove_suffix(1);
  return std::string(trim_view(trimmed));
}

}  // namespace

std::string normalize_header(std::string_view line) {
  return collapse_whitespace(strip_trailing_colon(trim_view(line)));
}

std::vector<std::string> extract_headers(std::string_view note_text, const HeaderRules& rules) {
  std::vector<std::string> headers;
  for (const Line& line : split_lines(note_text)) {
    const std::string_view raw = note_text.substr(line.start, line.end - line.start);
    if (is_header_line(raw, rules)) headers.push_back(strip_trailing_colon(trim_view(raw)));
  }
  return headers;
}

void HeaderLexicon::add(const std::string& normalized, std::size_t count) {
  if (normalized.empty()) return;
  counts_[normalized] += count;
}

bool HeaderLexicon::contains(const std::string& normalized) const {
  return counts_.count(normalized) != 0;
}

std::size_t HeaderLexicon::count(const std::string& normalized) const {
  auto it = counts_.find(normalized);
  return it == counts_.end() ? 0 : it->second;
}

HeaderLexicon build_header_lexicon(const std::vector<Document>& notes, const HeaderRules& rules) {
  HeaderLexicon lexicon;
  for (const Document& note : notes)
    for (const std::string& header : extract_headers(note.text, rules))
      lexicon.add(collapse_whitespace(header));
  return lexicon;
}

std::size_t score_note(std::string_view note_text, const HeaderLexicon& lexicon,
                       const HeaderRules& rules) {
  std::set<std::string> distinct;
  for (const std::string& header : extract_headers(note_text, rules)) {
    std::string normalized = collapse_whitespace(header);
    if (lexicon.contains(normalized)) distinct.insert(std::move(normalized));
  }
  return distinct.size();
}

std::vector<ScoredCandidate> rank_candidates(std::vector<ScoredCandidate> scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
  return scored;
}

std::vector<ScoredCandidate> select_top_n(std::vector<ScoredCandidate> scored, std::size_t n) {
  std::vector<ScoredCandidate> ranked = rank_candidates(std::move(scored));
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

std::vector<NoteSection> split_sections(std::string_view note_text, const HeaderLexicon& lexicon,
                                        const HeaderRules& rules) {
  std::vector<NoteSection> sections;
  if (note_text.empty()) return sections;

  struct HeaderHit {
    Line line;
    std::string normalized;
  };
  std::vector<HeaderHit> hits;
  for (const Line& line : split_lines(note_text)) {
    const std::string_view raw = note_text.substr(line.start, line.end - line.start);
    if (!is_header_line(raw, rules)) continue;
    std::string normalized = normalize_header(raw);
    if (lexicon.contains(normalized)) hits.push_back({line, std::move(normalized)});
  }

  auto body_of = [&](std::size_t from, std::size_t to) {
    return std::string(trim_view(note_text.substr(from, to - from)));
  };

  if (hits.empty()) {
    sections.push_back({std::nullopt, body_of(0, note_text.size()), 0, note_text.size()});
    return sections;
  }
  if (hits.front().line.start > 0)
    sections.push_back({std::nullopt, body_of(0, hits.front().line.start), 0,
                        hits.front().line.start});
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const std::size_t section_end =
        i + 1 < hits.size() ? hits[i + 1].line.start : note_text.size();
    const std::size_t body_start = std::min(hits[i].line.end + 1, section_end);
    sections.push_back({hits[i].normalized, body_of(body_start, section_end),
                        hits[i].line.start, section_end});
  }
  return sections;
}

}  // namespace forge
