#include "forge/rouge.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "forge/error.hpp"
#include "forge/segmenter.hpp"
#include "forge/textutil.hpp"

namespace forge {

std::string to_string(RougeVariant v) {
  switch (v) {
    case RougeVariant::R1: return "rouge1";
    case RougeVariant::R2: return "rouge2";
    case RougeVariant::RL: return "rougeL";
    case RougeVariant::RLSum: return "rougeLsum";
  }
  return "rouge1";
}

RougeVariant rouge_variant_from_string(const std::string& s) {
  if (s == "rouge1" || s == "r1") return RougeVariant::R1;
  if (s == "rouge2" || s == "r2") return RougeVariant::R2;
  if (s == "rougeL" || s == "rl") return RougeVariant::RL;
  if (s == "rougeLsum" || s == "rlsum") return RougeVariant::RLSum;
  throw config_error("unknown rouge variant \"" + s + "\"");
}

std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(text)) {
    std::string_view slice = text.substr(t.start, t.end - t.start);
    bool wordlike = false;
    for (char c : slice)
      if (is_word_byte(static_cast<unsigned char>(c))) {
        wordlike = true;
        break;
      }
    if (wordlike) out.push_back(to_lower_ascii(slice));
  }
  return out;
}

namespace {

constexpr char kGramSep = '\x1f';

std::string gram_key(const std::vector<std::string>& tokens, std::size_t begin, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) key.push_back(kGramSep);
    key += tokens[begin + i];
  }
  return key;
}

}  // namespace

std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                          std::size_t n) {
  if (n == 0) throw config_error("ngram_counts: n must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const std::string& t : tokens) lowered.push_back(to_lower_ascii(t));
  for (std::size_t i = 0; i + n <= lowered.size(); ++i) ++counts[gram_key(lowered, i, n)];
  return counts;
}

ScoreTriple rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
  const auto cand_counts = ngram_counts(rouge_tokens(candidate), n);
  const auto ref_counts = ngram_counts(rouge_tokens(reference), n);
  std::size_t overlap = 0;
  std::size_t cand_total = 0;
  std::size_t ref_total = 0;
  for (const auto& [gram, count] : cand_counts) {
    cand_total += count;
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  for (const auto& [gram, count] : ref_counts) ref_total += count;
  const double p = cand_total ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
  const double r = ref_total ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
  return make_score(p, r);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ScoreTriple rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = rouge_tokens(candidate);
  const auto ref = rouge_tokens(reference);
  if (cand.empty() || ref.empty()) return make_score(0.0, 0.0);
  const double l = static_cast<double>(lcs_length(cand, ref));
  return make_score(l / static_cast<double>(cand.size()), l / static_cast<double>(ref.size()));
}

namespace {

std::vector<std::vector<std::string>> sentence_token_lists(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (const Sentence& s : split_sentences(text)) {
    auto tokens = rouge_tokens(text.substr(s.start, s.end - s.start));
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

// Positions in `ref` that take part in one LCS against `cand`.
std::vector<std::size_t> lcs_positions(const std::vector<std::string>& ref,
                                       const std::vector<std::string>& cand) {
  const std::size_t m = ref.size();
  const std::size_t n = cand.size();
  std::vector<std::vector<std::size_t>> table(m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      table[i][j] = ref[i - 1] == cand[j - 1] ? table[i - 1][j - 1] + 1
                                              : std::max(table[i - 1][j], table[i][j - 1]);
  std::vector<std::size_t> positions;
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      positions.push_back(i - 1);
      --i;
      --j;
    } else if (table[i - 1][j] > table[i][j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(positions.begin(), positions.end());
  return positions;
}

}  // namespace

ScoreTriple rouge_lsum(std::string_view candidate, std::string_view reference) {
  const auto cand_sents = sentence_token_lists(candidate);
  const auto ref_sents = sentence_token_lists(reference);
  std::size_t cand_total = 0;
  std::size_t ref_total = 0;
  std::unordered_map<std::string, std::size_t> cand_budget;
  std::unordered_map<std::string, std::size_t> ref_budget;
  for (const auto& s : cand_sents)
    for (const auto& t : s) {
      ++cand_budget[t];
      ++cand_total;
    }
  for (const auto& s : ref_sents)
    for (const auto& t : s) {
      ++ref_budget[t];
      ++ref_total;
    }
  if (cand_total == 0 || ref_total == 0) return make_score(0.0, 0.0);

  // Union LCS per reference sentence, every token creditable once per side.
  std::size_t hits = 0;
  for (const auto& ref_sent : ref_sents) {
    std::set<std::size_t> union_positions;
    for (const auto& cand_sent : cand_sents)
      for (std::size_t pos : lcs_positions(ref_sent, cand_sent)) union_positions.insert(pos);
    for (std::size_t pos : union_positions) {
      const std::string& tok = ref_sent[pos];
      auto c = cand_budget.find(tok);
      auto r = ref_budget.find(tok);
      if (c != cand_budget.end() && c->second > 0 && r != ref_budget.end() && r->second > 0) {
        ++hits;
        --c->second;
        --r->second;
      }
    }
  }
  return make_score(static_cast<double>(hits) / static_cast<double>(cand_total),
                    static_cast<double>(hits) / static_cast<double>(ref_total));
}

ScoreTriple rouge_score(std::string_view candidate, std::string_view reference, RougeVariant v) {
  switch (v) {
    case RougeVariant::R1: return rouge_n(candidate, reference, 1);
    case RougeVariant::R2: return rouge_n(candidate, reference, 2);
    case RougeVariant::RL: return rouge_l(candidate, reference);
    case RougeVariant::RLSum: return rouge_lsum(candidate, reference);
  }
  return rouge_n(candidate, reference, 1);
}

MetricReport evaluate_corpus(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw data_error("evaluate_corpus: no pairs");
  std::unordered_set<std::string> ids;
  MetricReport report;
  auto add = [](ScoreTriple& acc, const ScoreTriple& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.f1 += s.f1;
  };
  for (const EvalPair& pair : pairs) {
    if (!ids.insert(pair.id).second)
      throw data_error("evaluate_corpus: duplicate pair id \"" + pair.id + "\"");
    add(report.r1, rouge_n(pair.candidate, pair.reference, 1));
    add(report.r2, rouge_n(pair.candidate, pair.reference, 2));
    add(report.rl, rouge_l(pair.candidate, pair.reference));
    add(report.rlsum, rouge_lsum(pair.candidate, pair.reference));
  }
  const double n = static_cast<double>(pairs.size());
  for (ScoreTriple* t : {&report.r1, &report.r2, &report.rl, &report.rlsum}) {
    t->precision /= n;
    t->recall /= n;
    t->f1 /= n;
  }
  report.n_pairs = pairs.size();
  return report;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string format_report_table(const MetricReport& report) {
  const ScoreTriple* triples[] = {&report.r1, &report.r2, &report.rl, &report.rlsum};
  std::string out;
  out += "metric       R1      R2      RL      RLSum\n";
  const char* rows[] = {"precision", "recall", "f1"};
  for (int row = 0; row < 3; ++row) {
    char line[128];
    const ScoreTriple& a = *triples[0];
    const ScoreTriple& b = *triples[1];
    const ScoreTriple& c = *triples[2];
    const ScoreTriple& d = *triples[3];
    auto field = [&](const ScoreTriple& t) {
      return row == 0 ? t.precision : row == 1 ? t.recall : t.f1;
    };
    std::snprintf(line, sizeof(line), "%-10s %s  %s  %s  %s\n", rows[row],
                  fixed4(field(a)).c_str(), fixed4(field(b)).c_str(), fixed4(field(c)).c_str(),
                  fixed4(field(d)).c_str());
    out += line;
  }
  out += "n_pairs    " + std::to_string(report.n_pairs) + "\n";
  return out;
}

std::string format_report_tsv(const MetricReport& report) {
  std::string header = "n_pairs";
  std::string values = std::to_string(report.n_pairs);
  const std::pair<const char*, const ScoreTriple*> columns[] = {
      {"r1", &report.r1}, {"r2", &report.r2}, {"rl", &report.rl}, {"rlsum", &report.rlsum}};
  for (const auto& [name, triple] : columns) {
    header += std::string("\t") + name + "_precision\t" + name + "_recall\t" + name + "_f1";
    values += "\t" + full(triple->precision) + "\t" + full(triple->recall) + "\t" + full(triple->f1);
  }
  return header + "\n" + values + "\n";
}

}  // namespace forge
