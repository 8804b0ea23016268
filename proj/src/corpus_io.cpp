#include "forge/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "forge/error.hpp"
#include "forge/textutil.hpp"

namespace forge {

using njson = nlohmann::ordered_json;

std::string to_string(SpanSource source) {
  return source == SpanSource::LexiconMatch ? "lexicon" : "ner";
}

SpanSource span_source_from_string(const std::string& s) {
  if (s == "lexicon") return SpanSource::LexiconMatch;
  if (s == "ner") return SpanSource::ExternalNer;
  throw data_error("unknown span source \"" + s + "\"");
}

std::string to_string(Speaker s) { return s == Speaker::Doctor ? "doctor" : "patient"; }

Speaker speaker_from_string(const std::string& s) {
  if (s == "doctor") return Speaker::Doctor;
  if (s == "patient") return Speaker::Patient;
  throw data_error("unknown speaker \"" + s + "\"");
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Natural: return "natural";
    case Provenance::SyntheticStage1: return "synthetic_stage1";
    case Provenance::SyntheticStage2: return "synthetic_stage2";
  }
  return "natural";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "natural") return Provenance::Natural;
  if (s == "synthetic_stage1") return Provenance::SyntheticStage1;
  if (s == "synthetic_stage2") return Provenance::SyntheticStage2;
  throw data_error("unknown provenance \"" + s + "\"");
}

ScoreTriple make_score(double precision, double recall) {
  ScoreTriple t;
  t.precision = precision;
  t.recall = recall;
  t.f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return t;
}

namespace {

std::string loc(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

// Applies `fn` to every non-empty line; rethrows parse problems as
// data_error carrying the line number.
template <typename Fn>
void for_each_jsonl_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    njson record;
    try {
      record = njson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(loc(path, line_no) + ": malformed JSON line: " + e.what());
    }
    try {
      fn(record, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(loc(path, line_no) + ": bad record: " + e.what());
    }
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw data_error("write failed for " + path.string());
}

void check_dialogue(const Dialogue& d, const std::string& where) {
  if (d.turns.empty()) throw data_error(where + ": dialogue for \"" + d.note_id + "\" has no turns");
  if (d.rank_score && d.provenance == Provenance::Natural)
    throw data_error(where + ": natural dialogue \"" + d.note_id + "\" carries a rank_score");
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  for_each_jsonl_record(path, [&](const njson& record, std::size_t line_no) {
    Document doc;
    doc.id = record.at("id").get<std::string>();
    if (doc.id.empty()) throw data_error(loc(path, line_no) + ": empty document id");
    doc.text = record.at("text").get<std::string>();
    if (record.contains("meta") && !record.at("meta").is_null()) {
      for (const auto& [key, value] : record.at("meta").items())
        doc.meta[key] = value.get<std::string>();
    }
    if (!seen.insert(doc.id).second)
      throw data_error(loc(path, line_no) + ": duplicate document id \"" + doc.id + "\"");
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::size_t write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const Document& doc : docs) {
    njson record;
    record["id"] = doc.id;
    record["text"] = doc.text;
    record["meta"] = njson::object();
    for (const auto& [key, value] : doc.meta) record["meta"][key] = value;
    out << record.dump() << '\n';
  }
  finish_write(out, path);
  return docs.size();
}

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path) {
  std::vector<Dialogue> dialogues;
  for_each_jsonl_record(path, [&](const njson& record, std::size_t line_no) {
    Dialogue d;
    d.note_id = record.at("note_id").get<std::string>();
    for (const auto& turn : record.at("turns")) {
      DialogueTurn t;
      t.speaker = speaker_from_string(turn.at("speaker").get<std::string>());
      t.text = turn.at("text").get<std::string>();
      d.turns.push_back(std::move(t));
    }
    d.provenance = provenance_from_string(record.at("provenance").get<std::string>());
    if (record.contains("rank_score") && !record.at("rank_score").is_null())
      d.rank_score = record.at("rank_score").get<double>();
    check_dialogue(d, loc(path, line_no));
    dialogues.push_back(std::move(d));
  });
  return dialogues;
}

std::size_t write_dialogues(const std::vector<Dialogue>& dialogues,
                            const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const Dialogue& d : dialogues) {
    check_dialogue(d, path.string());
    njson record;
    record["note_id"] = d.note_id;
    record["turns"] = njson::array();
    for (const DialogueTurn& t : d.turns)
      record["turns"].push_back({{"speaker", to_string(t.speaker)}, {"text", t.text}});
    record["provenance"] = to_string(d.provenance);
    record["rank_score"] = d.rank_score ? njson(*d.rank_score) : njson(nullptr);
    out << record.dump() << '\n';
  }
  finish_write(out, path);
  return dialogues.size();
}

std::vector<AnnotationSpan> validate_spans(const Document& doc,
                                           std::vector<AnnotationSpan> spans) {
  for (const AnnotationSpan& span : spans) {
    if (span.start >= span.end)
      throw data_error("doc \"" + doc.id + "\": empty or inverted span [" +
                       std::to_string(span.start) + ", " + std::to_string(span.end) + ")");
    if (span.end > doc.text.size())
      throw data_error("doc \"" + doc.id + "\": span [" + std::to_string(span.start) + ", " +
                       std::to_string(span.end) + ") exceeds text length " +
                       std::to_string(doc.text.size()));
    if (!is_char_boundary(doc.text, span.start) || !is_char_boundary(doc.text, span.end))
      throw data_error("doc \"" + doc.id + "\": span [" + std::to_string(span.start) + ", " +
                       std::to_string(span.end) + ") splits a multi-byte character");
  }
  std::stable_sort(spans.begin(), spans.end(), [](const AnnotationSpan& a, const AnnotationSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return spans;
}

}  // namespace forge
