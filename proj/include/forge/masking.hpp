#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "forge/segmenter.hpp"
#include "forge/types.hpp"

namespace forge {

enum class MaskPolicy {
  DualChoseLexicon,
  DualChoseNer,
  OnlyLexicon,
  OnlyNer,
  RandomSentence,
};

std::string to_string(MaskPolicy policy);
MaskPolicy mask_policy_from_string(const std::string& s);

struct MaskingConfig {
  double p_lexicon = 0.70;          // lexicon share when both sources fire
  double sentence_mask_rate = 0.15;  // fraction of sentences masked under GSG
  std::size_t max_sentinels = 100;
  std::uint64_t master_seed = 0;
  bool combined = false;  // also mask random sentences alongside entity spans
};

// One pre-training unit: sentinel-masked input and its pseudo-summary
// target. The input holds sentinels 0..k-1, the target 0..k (terminal).
struct MaskedExample {
  std::string doc_id;
  std::string masked_input;
  std::string target;
  MaskPolicy policy = MaskPolicy::OnlyLexicon;
  std::uint64_t seed = 0;
  std::size_t dropped_spans = 0;  // tail spans beyond the sentinel budget
};

// "<extra_id_{i}>"
std::string sentinel_token(std::size_t i);

// Stable 64-bit hash of (master_seed, doc_id); identical on all platforms so
// parallel sharding cannot change outputs.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view doc_id);

// Deterministic draws on top of mt19937_64 (no std::*_distribution, whose
// streams are implementation-defined).
double unit_draw(std::mt19937_64& rng);
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

// Pure form: u is the uniform draw consumed when both sources are present.
MaskPolicy select_policy(bool has_lexicon, bool has_ner, double u, double p_lexicon);
MaskPolicy select_policy(bool has_lexicon, bool has_ner, std::mt19937_64& rng,
                         const MaskingConfig& config);

// Replaces the i-th span with "<extra_id_i>" and emits the target
// "<extra_id_0> span0 <extra_id_1> span1 ... <extra_id_k>". Spans must be
// non-empty and within the text; overlapping or adjacent spans are merged
// first. Spans beyond max_sentinels-1 are dropped from the end and counted.
MaskedExample mask_spans(const Document& doc, std::vector<AnnotationSpan> spans,
                         const MaskingConfig& config);

// Masks k = max(1, round_half_up(rate * S)) distinct sentences chosen
// uniformly without replacement, sentinel-assigned in document order.
MaskedExample mask_random_sentences(const Document& doc, const std::vector<Sentence>& sentences,
                                    std::mt19937_64& rng, const MaskingConfig& config);

// Policy dispatch for one document. Returns nullopt for documents that
// yield no example (empty text, or no sentences for the random policy).
std::optional<MaskedExample> build_pretraining_example(const Document& doc,
                                                       const std::vector<AnnotationSpan>& lexicon_spans,
                                                       const std::vector<AnnotationSpan>& ner_spans,
                                                       const MaskingConfig& config,
                                                       const SentenceSplitter& splitter);

// Splices each target segment back over its sentinel; returns the original
// document text. Throws data_error when input and target sentinels disagree.
std::string reconstruct(std::string_view masked_input, std::string_view target);

std::size_t count_sentinels(std::string_view text);

// masked.jsonl: {"doc_id": str, "input": str, "target": str, "policy": str,
// "seed": int}
std::size_t write_masked_examples(const std::vector<MaskedExample>& examples,
                                  const std::filesystem::path& path);
std::vector<MaskedExample> load_masked_examples(const std::filesystem::path& path);

}  // namespace forge
