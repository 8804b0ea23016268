#include "forge/cli.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "forge/augmentor.hpp"
#include "forge/corpus_io.hpp"
#include "forge/error.hpp"
#include "forge/rouge.hpp"
#include "forge/sectionizer.hpp"
#include "forge/segmenter.hpp"
#include "forge/term_annotator.hpp"
#include "forge/textutil.hpp"
#include "forge/version.hpp"

namespace forge::cli {

using njson = nlohmann::ordered_json;

namespace {

std::size_t resolve_jobs(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Order-stable parallel map: workers pull indices, results land by index.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::min(std::max<std::size_t>(jobs, 1), std::max<std::size_t>(count, 1));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        {
          std::lock_guard lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_run_manifest(const std::filesystem::path& out_path, const std::string& subcommand,
                        const njson& config, const njson& stats) {
  njson manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["config"] = config;
  manifest["stats"] = stats;
  const std::filesystem::path path = out_path.string() + ".run.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  out.flush();
  if (!out) throw data_error("write failed for " + path.string());
}

}  // namespace

PretrainBuildStats run_pretrain_build(const PretrainBuildOptions& options) {
  const std::vector<Document> docs = load_corpus(options.docs);
  const TermLexicon lexicon = build_lexicon(options.lexicon);
  const NerFile ner = load_ner_annotations(options.ner);

  std::unordered_set<std::string> known_ids;
  for (const Document& doc : docs) known_ids.insert(doc.id);
  for (const auto& [doc_id, spans] : ner.by_doc)
    if (!known_ids.count(doc_id))
      throw data_error("NER file references unknown document id \"" + doc_id + "\"");

  MaskingConfig config;
  config.master_seed = options.seed;
  config.combined = options.combined;
  const SentenceSplitter splitter;

  std::vector<std::optional<MaskedExample>> results(docs.size());
  parallel_for(docs.size(), resolve_jobs(options.jobs), [&](std::size_t i) {
    const Document& doc = docs[i];
    const std::vector<AnnotationSpan> lexicon_spans =
        merge_overlapping(annotate_lexicon(doc, lexicon));
    std::vector<AnnotationSpan> ner_spans;
    if (const auto* raw = ner.find(doc.id))
      ner_spans = merge_overlapping(validate_spans(doc, *raw));
    results[i] = build_pretraining_example(doc, lexicon_spans, ner_spans, config, splitter);
  });

  PretrainBuildStats stats;
  stats.documents = docs.size();
  std::vector<MaskedExample> examples;
  examples.reserve(docs.size());
  for (std::optional<MaskedExample>& result : results) {
    if (!result) {
      ++stats.skipped;
      continue;
    }
    ++stats.policy_histogram[to_string(result->policy)];
    stats.sentinels += count_sentinels(result->masked_input);
    stats.dropped_spans += result->dropped_spans;
    examples.push_back(std::move(*result));
  }
  stats.examples = examples.size();
  write_masked_examples(examples, options.out);

  njson config_echo{{"docs", options.docs.string()},
                    {"lexicon", options.lexicon.string()},
                    {"ner", options.ner.string()},
                    {"out", options.out.string()},
                    {"seed", options.seed},
                    {"jobs", options.jobs},
                    {"combined", options.combined},
                    {"p_lexicon", config.p_lexicon},
                    {"sentence_mask_rate", config.sentence_mask_rate},
                    {"max_sentinels", config.max_sentinels}};
  njson stats_json{{"documents", stats.documents},
                   {"examples", stats.examples},
                   {"skipped", stats.skipped},
                   {"sentinels", stats.sentinels},
                   {"dropped_spans", stats.dropped_spans},
                   {"policy_histogram", stats.policy_histogram}};
  write_run_manifest(options.out, "pretrain-build", config_echo, stats_json);
  return stats;
}

SelectStats run_select(const SelectOptions& options) {
  const std::vector<Document> train_notes = load_corpus(options.train_notes);
  const std::vector<Document> candidates = load_corpus(options.candidates);
  const HeaderLexicon lexicon = build_header_lexicon(train_notes);

  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const Document& doc : candidates)
    scored.push_back({doc.id, score_note(doc.text, lexicon), 0});
  const std::vector<ScoredCandidate> ranked = rank_candidates(std::move(scored));

  std::ofstream out(options.out, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + options.out.string());
  SelectStats stats;
  stats.candidates = ranked.size();
  stats.lexicon_headers = lexicon.size();
  for (const ScoredCandidate& c : ranked) {
    const bool selected = c.rank <= options.n;
    if (selected) ++stats.selected;
    njson record{{"doc_id", c.doc_id}, {"score", c.score}, {"rank", c.rank},
                 {"selected", selected}};
    out << record.dump() << '\n';
  }
  out.flush();
  if (!out) throw data_error("write failed for " + options.out.string());

  njson config_echo{{"candidates", options.candidates.string()},
                    {"train_notes", options.train_notes.string()},
                    {"n", options.n},
                    {"out", options.out.string()}};
  njson stats_json{{"candidates", stats.candidates},
                   {"selected", stats.selected},
                   {"lexicon_headers", stats.lexicon_headers}};
  write_run_manifest(options.out, "select", config_echo, stats_json);
  return stats;
}

namespace {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace

AugmentStats run_augment(const AugmentOptions& options) {
  std::vector<Document> notes = load_corpus(options.notes);
  const ChatEndpointConfig endpoint = load_endpoint_config(options.endpoint_config);
  const Exemplar exemplar = load_exemplar(options.exemplar);
  const Task task = task_from_string(options.task);

  PromptTemplate tmpl = default_prompt_template();
  if (options.stage1_template) tmpl.stage1_guidelines = read_text_file(*options.stage1_template);
  if (options.stage2_template) tmpl.stage2_instruction = read_text_file(*options.stage2_template);
  tmpl.note_token_limit = endpoint.input_token_limit;

  AugmentPaths paths;
  paths.manifest = options.resume ? *options.resume
                                  : std::filesystem::path(options.out.string() + ".manifest.jsonl");
  paths.generations = options.out.string() + ".generations.jsonl";

  ChatClient client(endpoint);
  AugmentationResult generation =
      run_augmentation(notes, client, exemplar, tmpl, task, paths, options.resume.has_value());

  std::vector<std::string> training_refs;
  if (options.train_refs) {
    for (const Document& doc : load_corpus(*options.train_refs)) training_refs.push_back(doc.text);
    if (training_refs.empty())
      throw data_error("train-refs corpus " + options.train_refs->string() + " is empty");
  } else {
    training_refs.push_back(exemplar.dialogue);
  }

  const std::vector<Dialogue> kept =
      rank_generations(generation.dialogues, training_refs, options.n,
                       rouge_variant_from_string(options.rank_metric));

  // Final dataset: the synthetic dialogue is the model input, the real note
  // the training target.
  std::map<std::string, const Document*> note_by_id;
  for (const Document& doc : notes) note_by_id[doc.id] = &doc;
  std::ofstream out(options.out, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + options.out.string());
  for (const Dialogue& d : kept) {
    auto it = note_by_id.find(d.note_id);
    if (it == note_by_id.end())
      throw data_error("generated dialogue references unknown note \"" + d.note_id + "\"");
    njson record{{"note_id", d.note_id},
                 {"input", flatten_dialogue(d)},
                 {"target", it->second->text}};
    out << record.dump() << '\n';
  }
  out.flush();
  if (!out) throw data_error("write failed for " + options.out.string());

  // Fold rank scores back into the per-note manifest.
  std::map<std::string, double> scores;
  for (const Dialogue& d : kept) scores[d.note_id] = *d.rank_score;
  for (ManifestEntry& entry : generation.entries) {
    auto it = scores.find(entry.note_id);
    entry.rank_score = it == scores.end() ? std::nullopt : std::optional<double>(it->second);
  }
  write_generation_manifest(generation.entries, paths.manifest);

  AugmentStats stats;
  stats.notes = notes.size();
  stats.generated = generation.dialogues.size();
  stats.resumed = generation.skipped;
  stats.kept = kept.size();
  stats.truncated_notes = generation.truncated_notes;
  for (const ManifestEntry& entry : generation.entries)
    ++stats.status_histogram[to_string(entry.status)];

  njson config_echo{{"notes", options.notes.string()},
                    {"endpoint_config", options.endpoint_config.string()},
                    {"task", options.task},
                    {"n", options.n},
                    {"exemplar", options.exemplar.string()},
                    {"out", options.out.string()},
                    {"manifest", paths.manifest.string()},
                    {"generations", paths.generations.string()},
                    {"train_refs", options.train_refs ? options.train_refs->string() : ""},
                    {"rank_metric", options.rank_metric},
                    {"model", endpoint.model_name},
                    {"base_url", endpoint.base_url},
                    {"temperature", endpoint.temperature}};
  njson stats_json{{"notes", stats.notes},
                   {"generated", stats.generated},
                   {"resumed", stats.resumed},
                   {"kept", stats.kept},
                   {"truncated_notes", stats.truncated_notes},
                   {"status_histogram", stats.status_histogram}};
  write_run_manifest(options.out, "augment", config_echo, stats_json);
  return stats;
}

MetricReport run_evaluate(const EvaluateOptions& options, std::ostream& out) {
  const std::vector<Document> pred = load_corpus(options.pred);
  const std::vector<Document> ref = load_corpus(options.ref);

  std::map<std::string, const Document*> pred_by_id;
  for (const Document& doc : pred) pred_by_id[doc.id] = &doc;
  std::map<std::string, const Document*> ref_by_id;
  for (const Document& doc : ref) ref_by_id[doc.id] = &doc;

  std::vector<std::string> missing;
  for (const Document& doc : ref)
    if (!pred_by_id.count(doc.id)) missing.push_back("prediction for \"" + doc.id + "\"");
  for (const Document& doc : pred)
    if (!ref_by_id.count(doc.id)) missing.push_back("reference for \"" + doc.id + "\"");
  if (!missing.empty()) {
    std::string detail = "id mismatch between prediction and reference files; missing:";
    for (const std::string& m : missing) detail += " " + m;
    throw data_error(detail);
  }

  std::vector<EvalPair> pairs;
  pairs.reserve(ref.size());
  for (const Document& doc : ref)
    pairs.push_back({doc.id, pred_by_id.at(doc.id)->text, doc.text});
  const MetricReport report = evaluate_corpus(pairs);

  out << format_report_table(report);
  if (options.tsv) {
    std::ofstream tsv(*options.tsv, std::ios::binary | std::ios::trunc);
    if (!tsv) throw data_error("cannot write " + options.tsv->string());
    tsv << format_report_tsv(report);
    tsv.flush();
    if (!tsv) throw data_error("write failed for " + options.tsv->string());
    njson config_echo{{"pred", options.pred.string()},
                      {"ref", options.ref.string()},
                      {"tsv", options.tsv->string()}};
    njson stats_json{{"n_pairs", report.n_pairs},
                     {"r1_f1", report.r1.f1},
                     {"r2_f1", report.r2.f1},
                     {"rl_f1", report.rl.f1},
                     {"rlsum_f1", report.rlsum.f1}};
    write_run_manifest(*options.tsv, "evaluate", config_echo, stats_json);
  }
  return report;
}

std::size_t run_stats(const StatsOptions& options) {
  if (options.field != "input" && options.field != "target")
    throw config_error("stats field must be \"input\" or \"target\"");
  if (options.percentile < 1 || options.percentile > 100)
    throw config_error("percentile must be in [1, 100]");

  std::ifstream in(options.docs, std::ios::binary);
  if (!in) throw data_error("cannot open " + options.docs.string());
  std::vector<std::size_t> lengths;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    try {
      const njson record = njson::parse(line);
      lengths.push_back(count_tokens(record.at(options.field).get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw data_error(options.docs.string() + ":" + std::to_string(line_no) + ": bad record: " +
                       e.what());
    }
  }
  if (lengths.empty()) throw data_error("no records in " + options.docs.string());
  return length_percentile(std::move(lengths), options.percentile / 100.0);
}

}  // namespace forge::cli
