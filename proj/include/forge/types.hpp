#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace forge {

// A raw note or dialogue text. Byte offsets into `text` are the sole
// coordinate system every span-producing module uses.
struct Document {
  std::string id;
  std::string text;
  std::map<std::string, std::string> meta;

  bool operator==(const Document&) const = default;
};

enum class SpanSource { LexiconMatch, ExternalNer };

std::string to_string(SpanSource source);
SpanSource span_source_from_string(const std::string& s);

// Entity mention as a half-open byte range [start, end).
struct AnnotationSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
  SpanSource source = SpanSource::LexiconMatch;

  bool operator==(const AnnotationSpan&) const = default;
};

enum class Speaker { Doctor, Patient };
enum class Provenance { Natural, SyntheticStage1, SyntheticStage2 };

std::string to_string(Speaker s);
Speaker speaker_from_string(const std::string& s);
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct DialogueTurn {
  Speaker speaker = Speaker::Doctor;
  std::string text;

  bool operator==(const DialogueTurn&) const = default;
};

struct Dialogue {
  std::string note_id;
  std::vector<DialogueTurn> turns;
  Provenance provenance = Provenance::Natural;
  // Present only on synthetic dialogues that went through ranking.
  std::optional<double> rank_score;

  bool operator==(const Dialogue&) const = default;
};

// One section of a note; header is absent for the preamble. Sections of a
// note are ordered, non-overlapping and jointly cover [0, note length).
struct NoteSection {
  std::optional<std::string> header;
  std::string body;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const NoteSection&) const = default;
};

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// f1 is the harmonic mean, 0 when precision + recall == 0.
ScoreTriple make_score(double precision, double recall);

struct MetricReport {
  ScoreTriple r1;
  ScoreTriple r2;
  ScoreTriple rl;
  ScoreTriple rlsum;
  std::size_t n_pairs = 0;
};

}  // namespace forge
