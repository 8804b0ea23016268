#pragma once

#include <filesystem>
#include <vector>

#include "forge/types.hpp"

namespace forge {

// JSON Lines, one record per line, UTF-8, no BOM.
//
// documents.jsonl:  {"id": str, "text": str, "meta": {str: str}}
// dialogues.jsonl:  {"note_id": str, "turns": [{"speaker": "doctor"|"patient",
//                    "text": str}], "provenance": "natural"|"synthetic_stage1"|
//                    "synthetic_stage2", "rank_score": float|null}

// Documents in file order; throws data_error on a malformed line (naming the
// line number) or a duplicate id (naming the id).
std::vector<Document> load_corpus(const std::filesystem::path& path);

// Returns the number of records written. load(write(docs)) == docs.
std::size_t write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path);

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path);
std::size_t write_dialogues(const std::vector<Dialogue>& dialogues,
                            const std::filesystem::path& path);

// Returns the spans sorted by (start, end). Rejects spans that run past the
// end of the text, are empty, or split a multi-byte UTF-8 character.
std::vector<AnnotationSpan> validate_spans(const Document& doc, std::vector<AnnotationSpan> spans);

}  // namespace forge
