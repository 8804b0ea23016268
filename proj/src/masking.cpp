#include "forge/masking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "forge/error.hpp"

namespace forge {

using njson = nlohmann::ordered_json;

std::string to_string(MaskPolicy policy) {
  switch (policy) {
    case MaskPolicy::DualChoseLexicon: return "dual_chose_lexicon";
    case MaskPolicy::DualChoseNer: return "dual_chose_ner";
    case MaskPolicy::OnlyLexicon: return "only_lexicon";
    case MaskPolicy::OnlyNer: return "only_ner";
    case MaskPolicy::RandomSentence: return "random_sentence";
  }
  return "only_lexicon";
}

MaskPolicy mask_policy_from_string(const std::string& s) {
  if (s == "dual_chose_lexicon") return MaskPolicy::DualChoseLexicon;
  if (s == "dual_chose_ner") return MaskPolicy::DualChoseNer;
  if (s == "only_lexicon") return MaskPolicy::OnlyLexicon;
  if (s == "only_ner") return MaskPolicy::OnlyNer;
  if (s == "random_sentence") return MaskPolicy::RandomSentence;
  throw data_error("unknown mask policy \"" + s + "\"");
}

std::string sentinel_token(std::size_t i) {
  return "<extra_id_" + std::to_string(i) + ">";
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view doc_id) {
  // FNV-1a over the little-endian seed bytes followed by the id bytes.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(master_seed >> (8 * i)));
  for (char c : doc_id) mix(static_cast<unsigned char>(c));
  return h;
}

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw data_error("uniform_below: n must be positive");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

MaskPolicy select_policy(bool has_lexicon, bool has_ner, double u, double p_lexicon) {
  if (has_lexicon && has_ner)
    return u < p_lexicon ? MaskPolicy::DualChoseLexicon : MaskPolicy::DualChoseNer;
  if (has_lexicon) return MaskPolicy::OnlyLexicon;
  if (has_ner) return MaskPolicy::OnlyNer;
  return MaskPolicy::RandomSentence;
}

MaskPolicy select_policy(bool has_lexicon, bool has_ner, std::mt19937_64& rng,
                         const MaskingConfig& config) {
  if (has_lexicon && has_ner)
    return select_policy(true, true, unit_draw(rng), config.p_lexicon);
  return select_policy(has_lexicon, has_ner, 0.0, config.p_lexicon);
}

namespace {

using ByteRange = std::pair<std::size_t, std::size_t>;

// Overlapping or adjacent ranges collapse to their union; two sentinels may
// never end up adjacent with no text between them.
std::vector<ByteRange> merge_ranges(std::vector<ByteRange> ranges) {
  std::sort(ranges.begin(), ranges.end());
  std::vector<ByteRange> merged;
  for (const ByteRange& r : ranges) {
    if (!merged.empty() && r.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, r.second);
    else
      merged.push_back(r);
  }
  return merged;
}

MaskedExample apply_masks(const Document& doc, std::vector<ByteRange> ranges,
                          const MaskingConfig& config) {
  ranges = merge_ranges(std::move(ranges));
  for (const ByteRange& r : ranges)
    if (r.first >= r.second || r.second > doc.text.size())
      throw data_error("doc \"" + doc.id + "\": mask range [" + std::to_string(r.first) + ", " +
                       std::to_string(r.second) + ") out of bounds");

  MaskedExample example;
  example.doc_id = doc.id;
  const std::size_t budget = config.max_sentinels > 0 ? config.max_sentinels - 1 : 0;
  if (budget == 0) throw config_error("max_sentinels must be >= 2");
  if (ranges.size() > budget) {
    example.dropped_spans = ranges.size() - budget;
    ranges.resize(budget);
  }

  std::string_view text = doc.text;
  std::string& input = example.masked_input;
  std::string& target = example.target;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const std::string tok = sentinel_token(i);
    input.append(text.substr(pos, ranges[i].first - pos));
    input.append(tok);
    target.append(tok);
    target.push_back(' ');
    target.append(text.substr(ranges[i].first, ranges[i].second - ranges[i].first));
    target.push_back(' ');
    pos = ranges[i].second;
  }
  input.append(text.substr(pos));
  target.append(sentinel_token(ranges.size()));
  return example;
}

}  // namespace

MaskedExample mask_spans(const Document& doc, std::vector<AnnotationSpan> spans,
                         const MaskingConfig& config) {
  if (spans.empty()) throw data_error("mask_spans: no spans for doc \"" + doc.id + "\"");
  std::vector<ByteRange> ranges;
  ranges.reserve(spans.size());
  for (const AnnotationSpan& s : spans) ranges.emplace_back(s.start, s.end);
  return apply_masks(doc, std::move(ranges), config);
}

namespace {

std::size_t gsg_count(std::size_t n_sentences, double rate) {
  const double k = std::floor(rate * static_cast<double>(n_sentences) + 0.5);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

// Partial Fisher-Yates: first k positions of a shuffled index range.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(k);
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::vector<ByteRange> pick_sentence_ranges(const std::vector<Sentence>& sentences,
                                            std::mt19937_64& rng, const MaskingConfig& config) {
  const std::size_t k = std::min(gsg_count(sentences.size(), config.sentence_mask_rate),
                                 sentences.size());
  std::vector<ByteRange> ranges;
  for (std::size_t idx : sample_without_replacement(sentences.size(), k, rng))
    ranges.emplace_back(sentences[idx].start, sentences[idx].end);
  return ranges;
}

}  // namespace

MaskedExample mask_random_sentences(const Document& doc, const std::vector<Sentence>& sentences,
                                    std::mt19937_64& rng, const MaskingConfig& config) {
  if (sentences.empty())
    throw data_error("mask_random_sentences: no sentences for doc \"" + doc.id + "\"");
  MaskedExample example = apply_masks(doc, pick_sentence_ranges(sentences, rng, config), config);
  example.policy = MaskPolicy::RandomSentence;
  return example;
}

namespace {

void validate_config(const MaskingConfig& config) {
  if (!(config.p_lexicon >= 0.0 && config.p_lexicon <= 1.0))
    throw config_error("p_lexicon must be in [0, 1]");
  if (!(config.sentence_mask_rate > 0.0 && config.sentence_mask_rate < 1.0))
    throw config_error("sentence_mask_rate must be in (0, 1)");
  if (config.max_sentinels < 2) throw config_error("max_sentinels must be >= 2");
}

}  // namespace

std::optional<MaskedExample> build_pretraining_example(const Document& doc,
                                                       const std::vector<AnnotationSpan>& lexicon_spans,
                                                       const std::vector<AnnotationSpan>& ner_spans,
                                                       const MaskingConfig& config,
                                                       const SentenceSplitter& splitter) {
  validate_config(config);
  if (doc.text.empty()) return std::nullopt;

  const std::uint64_t seed = derive_seed(config.master_seed, doc.id);
  std::mt19937_64 rng(seed);
  const MaskPolicy policy =
      select_policy(!lexicon_spans.empty(), !ner_spans.empty(), rng, config);

  MaskedExample example;
  if (policy == MaskPolicy::RandomSentence) {
    const std::vector<Sentence> sentences = splitter.split(doc.text);
    if (sentences.empty()) return std::nullopt;
    example = mask_random_sentences(doc, sentences, rng, config);
  } else {
    const bool use_lexicon =
        policy == MaskPolicy::DualChoseLexicon || policy == MaskPolicy::OnlyLexicon;
    const std::vector<AnnotationSpan>& chosen = use_lexicon ? lexicon_spans : ner_spans;
    std::vector<ByteRange> ranges;
    ranges.reserve(chosen.size());
    for (const AnnotationSpan& s : chosen) ranges.emplace_back(s.start, s.end);
    if (config.combined) {
      const std::vector<Sentence> sentences = splitter.split(doc.text);
      if (!sentences.empty())
        for (const ByteRange& r : pick_sentence_ranges(sentences, rng, config))
          ranges.push_back(r);
    }
    example = apply_masks(doc, std::move(ranges), config);
  }
  example.policy = policy;
  example.seed = seed;
  return example;
}

std::size_t count_sentinels(std::string_view text) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (true) {
    const std::string tok = sentinel_token(count);
    const std::size_t at = text.find(tok, pos);
    if (at == std::string_view::npos) break;
    pos = at + tok.size();
    ++count;
  }
  return count;
}

std::string reconstruct(std::string_view masked_input, std::string_view target) {
  // Input parts around sentinels 0..k-1.
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  std::size_t k = 0;
  while (true) {
    const std::string tok = sentinel_token(k);
    const std::size_t at = masked_input.find(tok, pos);
    if (at == std::string_view::npos) break;
    parts.push_back(masked_input.substr(pos, at - pos));
    pos = at + tok.size();
    ++k;
  }
  parts.push_back(masked_input.substr(pos));
  if (k == 0) throw data_error("reconstruct: masked input carries no sentinel");

  // Target segments between sentinels 0..k, each wrapped in single spaces.
  if (target.substr(0, sentinel_token(0).size()) != sentinel_token(0))
    throw data_error("reconstruct: target does not start with " + sentinel_token(0));
  std::string out;
  std::size_t tpos = sentinel_token(0).size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::string next = sentinel_token(i + 1);
    const std::size_t at = target.find(next, tpos);
    if (at == std::string_view::npos)
      throw data_error("reconstruct: target is missing " + next);
    std::string_view segment = target.substr(tpos, at - tpos);
    if (segment.size() < 2 || segment.front() != ' ' || segment.back() != ' ')
      throw data_error("reconstruct: malformed target segment before " + next);
    segment = segment.substr(1, segment.size() - 2);
    out.append(parts[i]);
    out.append(segment);
    tpos = at + next.size();
  }
  if (tpos != target.size())
    throw data_error("reconstruct: trailing bytes after terminal sentinel");
  out.append(parts[k]);
  return out;
}

std::size_t write_masked_examples(const std::vector<MaskedExample>& examples,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  for (const MaskedExample& e : examples) {
    njson record;
    record["doc_id"] = e.doc_id;
    record["input"] = e.masked_input;
    record["target"] = e.target;
    record["policy"] = to_string(e.policy);
    record["seed"] = e.seed;
    out << record.dump() << '\n';
  }
  out.flush();
  if (!out) throw data_error("write failed for " + path.string());
  return examples.size();
}

std::vector<MaskedExample> load_masked_examples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  std::vector<MaskedExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      const njson record = njson::parse(line);
      MaskedExample e;
      e.doc_id = record.at("doc_id").get<std::string>();
      e.masked_input = record.at("input").get<std::string>();
      e.target = record.at("target").get<std::string>();
      e.policy = mask_policy_from_string(record.at("policy").get<std::string>());
      e.seed = record.at("seed").get<std::uint64_t>();
      examples.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": bad record: " +
                       e.what());
    }
  }
  return examples;
}

}  // namespace forge
