#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "forge/cli.hpp"
#include "forge/corpus_io.hpp"
#include "forge/error.hpp"
#include "forge/masking.hpp"

#include "mock_endpoint.hpp"
#include "test_util.hpp"

using namespace forge;
using test::run_cmd;
using test::shq;
using test::TempDir;

namespace {

const std::string kBin = FORGE_BIN;

std::vector<Document> write_fixture_corpus(const std::filesystem::path& path,
                                           std::size_t count) {
  std::mt19937_64 rng(1000);
  std::vector<Document> docs;
  for (std::size_t i = 0; i < count; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "doc%04zu", i);
    std::string text;
    const std::size_t n_sentences = 1 + rng() % 9;
    for (std::size_t s = 0; s < n_sentences; ++s) {
      if (s) text += " ";
      text += test::random_sentence(rng, 3 + rng() % 6);
    }
    if (rng() % 3 == 0) text += " Fever and dry cough noted.";
    docs.push_back({id, text, {}});
  }
  write_corpus(docs, path);
  return docs;
}

// NER spans over the first few bytes of every other document.
void write_fixture_ner(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::string ner;
  for (std::size_t i = 0; i < docs.size(); i += 2) {
    const std::size_t end = std::min<std::size_t>(docs[i].text.size(), 7);
    ner += "{\"doc_id\":\"" + docs[i].id + "\",\"spans\":[{\"start\":0,\"end\":" +
           std::to_string(end) + ",\"label\":\"problem\",\"source\":\"ner\"}]}\n";
  }
  test::write_file(path, ner);
}

}  // namespace

TEST_CASE("pretrain-build is reproducible across worker counts") {
  TempDir dir;
  const auto docs = write_fixture_corpus(dir.file("docs.jsonl"), 120);
  test::write_file(dir.file("terms.txt"), "fever\ndry cough\nchronic pain\n");
  write_fixture_ner(dir.file("ner.jsonl"), docs);

  const std::string base = kBin + " pretrain-build --docs " + shq(dir.file("docs.jsonl")) +
                           " --lexicon " + shq(dir.file("terms.txt")) + " --ner " +
                           shq(dir.file("ner.jsonl")) + " --seed 13";
  const auto first =
      run_cmd(base + " --out " + shq(dir.file("a.jsonl")) + " --jobs 1");
  CHECK(first.exit_code == 0);
  const auto second =
      run_cmd(base + " --out " + shq(dir.file("b.jsonl")) + " --jobs 8");
  CHECK(second.exit_code == 0);
  CHECK(test::read_file(dir.file("a.jsonl")) == test::read_file(dir.file("b.jsonl")));
  CHECK(first.output.find("documents 120") != std::string::npos);
  // both dual policies appear once enough documents carry both span sources
  CHECK(first.output.find("dual_chose_lexicon") != std::string::npos);
  CHECK(first.output.find("dual_chose_ner") != std::string::npos);
  CHECK(std::filesystem::exists(dir.file("a.jsonl.run.json")));

  const auto rerun = run_cmd(base + " --out " + shq(dir.file("c.jsonl")) + " --jobs 3");
  CHECK(test::read_file(dir.file("a.jsonl")) == test::read_file(dir.file("c.jsonl")));
}

TEST_CASE("pretrain-build output reconstructs the corpus, with and without --combined") {
  TempDir dir;
  const auto docs = write_fixture_corpus(dir.file("docs.jsonl"), 60);
  test::write_file(dir.file("terms.txt"), "fever\ndry cough\n");
  write_fixture_ner(dir.file("ner.jsonl"), docs);
  const std::string base = kBin + " pretrain-build --docs " + shq(dir.file("docs.jsonl")) +
                           " --lexicon " + shq(dir.file("terms.txt")) + " --ner " +
                           shq(dir.file("ner.jsonl")) + " --seed 7 --out ";
  for (const char* extra : {"", " --combined"}) {
    const std::string out = std::string("m") + (*extra ? "c" : "p") + ".jsonl";
    REQUIRE(run_cmd(base + shq(dir.file(out)) + extra).exit_code == 0);
    std::map<std::string, std::string> text_by_id;
    for (const Document& d : docs) text_by_id[d.id] = d.text;
    const auto examples = load_masked_examples(dir.file(out));
    REQUIRE(!examples.empty());
    for (const MaskedExample& e : examples)
      CHECK(reconstruct(e.masked_input, e.target) == text_by_id.at(e.doc_id));
  }
}

TEST_CASE("an NER file naming an unknown document fails the build") {
  TempDir dir;
  write_fixture_corpus(dir.file("docs.jsonl"), 3);
  test::write_file(dir.file("terms.txt"), "fever\n");
  test::write_file(dir.file("ner.jsonl"),
                   "{\"doc_id\":\"ghost\",\"spans\":[{\"start\":0,\"end\":2,"
                   "\"label\":\"x\",\"source\":\"ner\"}]}\n");
  const auto result = run_cmd(kBin + " pretrain-build --docs " + shq(dir.file("docs.jsonl")) +
                              " --lexicon " + shq(dir.file("terms.txt")) + " --ner " +
                              shq(dir.file("ner.jsonl")) + " --seed 1 --out " +
                              shq(dir.file("out.jsonl")));
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("ghost") != std::string::npos);
}

TEST_CASE("pretrain-build accepts an empty corpus") {
  TempDir dir;
  test::write_file(dir.file("docs.jsonl"), "");
  test::write_file(dir.file("terms.txt"), "fever\n");
  test::write_file(dir.file("ner.jsonl"), "");
  const auto result = run_cmd(kBin + " pretrain-build --docs " + shq(dir.file("docs.jsonl")) +
                              " --lexicon " + shq(dir.file("terms.txt")) + " --ner " +
                              shq(dir.file("ner.jsonl")) + " --seed 1 --out " +
                              shq(dir.file("out.jsonl")));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("documents 0") != std::string::npos);
  CHECK(test::read_file(dir.file("out.jsonl")).empty());
}

TEST_CASE("data errors exit with code 2") {
  TempDir dir;
  test::write_file(dir.file("docs.jsonl"),
                   "{\"id\":\"n1\",\"text\":\"a\"}\n{\"id\":\"n1\",\"text\":\"b\"}\n");
  test::write_file(dir.file("terms.txt"), "fever\n");
  test::write_file(dir.file("ner.jsonl"), "");
  const auto result = run_cmd(kBin + " pretrain-build --docs " + shq(dir.file("docs.jsonl")) +
                              " --lexicon " + shq(dir.file("terms.txt")) + " --ner " +
                              shq(dir.file("ner.jsonl")) + " --seed 1 --out " +
                              shq(dir.file("out.jsonl")));
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("n1") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  const auto unknown = run_cmd(kBin + " pretrain-build --bogus-flag 1");
  CHECK(unknown.exit_code == 1);
  const auto missing = run_cmd(kBin + " evaluate");
  CHECK(missing.exit_code == 1);
  const auto help = run_cmd(kBin + " --help");
  CHECK(help.exit_code == 0);
}

TEST_CASE("select writes a ranked manifest with selected flags") {
  TempDir dir;
  const std::vector<Document> train = {
      {"t1", "PLAN:\nrest\nALLERGIES:\nnone\n", {}},
      {"t2", "PLAN:\nfluids\nMEDICATIONS:\nnone\n", {}},
  };
  write_corpus(train, dir.file("train.jsonl"));
  const std::vector<Document> candidates = {
      {"c1", "PLAN:\nx\nALLERGIES:\ny\nMEDICATIONS:\nz\n", {}},  // 3 headers
      {"c2", "PLAN:\nx\n", {}},                                   // 1
      {"c3", "ALLERGIES:\nx\nPLAN:\ny\n", {}},                    // 2
      {"c4", "nothing here\n", {}},                               // 0
      {"c5", "MEDICATIONS:\nm\nPLAN:\np\n", {}},                  // 2
  };
  write_corpus(candidates, dir.file("cand.jsonl"));

  const auto result = run_cmd(kBin + " select --candidates " + shq(dir.file("cand.jsonl")) +
                              " --train-notes " + shq(dir.file("train.jsonl")) +
                              " --n 2 --out " + shq(dir.file("sel.jsonl")));
  CHECK(result.exit_code == 0);

  std::istringstream lines(test::read_file(dir.file("sel.jsonl")));
  std::string line;
  std::vector<std::string> ids;
  std::vector<bool> selected;
  while (std::getline(lines, line)) {
    const auto record = nlohmann::json::parse(line);
    ids.push_back(record.at("doc_id"));
    selected.push_back(record.at("selected").get<bool>());
  }
  REQUIRE(ids.size() == 5);
  CHECK(ids[0] == "c1");  // score 3
  CHECK(ids[1] == "c3");  // score 2, id before c5
  CHECK(ids[2] == "c5");
  CHECK(ids[3] == "c2");
  CHECK(ids[4] == "c4");
  CHECK(selected == std::vector<bool>{true, true, false, false, false});
}

TEST_CASE("select with n=0 selects nothing") {
  TempDir dir;
  write_corpus({{"t1", "PLAN:\nx\n", {}}}, dir.file("train.jsonl"));
  write_corpus({{"c1", "PLAN:\nx\n", {}}}, dir.file("cand.jsonl"));
  const auto result = run_cmd(kBin + " select --candidates " + shq(dir.file("cand.jsonl")) +
                              " --train-notes " + shq(dir.file("train.jsonl")) +
                              " --n 0 --out " + shq(dir.file("sel.jsonl")));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("selected 0") != std::string::npos);
}

TEST_CASE("select falls back to id order when no headers score") {
  TempDir dir;
  write_corpus({{"t1", "all lowercase prose\n", {}}}, dir.file("train.jsonl"));
  write_corpus({{"b", "x", {}}, {"a", "y", {}}, {"c", "z", {}}}, dir.file("cand.jsonl"));
  const auto result = run_cmd(kBin + " select --candidates " + shq(dir.file("cand.jsonl")) +
                              " --train-notes " + shq(dir.file("train.jsonl")) +
                              " --n 1 --out " + shq(dir.file("sel.jsonl")));
  CHECK(result.exit_code == 0);
  std::istringstream lines(test::read_file(dir.file("sel.jsonl")));
  std::string line;
  std::getline(lines, line);
  const auto first = nlohmann::json::parse(line);
  CHECK(first.at("doc_id") == "a");
  CHECK(first.at("score") == 0);
  CHECK(first.at("selected").get<bool>());
}

TEST_CASE("evaluate prints the metric table and writes TSV") {
  TempDir dir;
  write_corpus({{"p1", "the dog sat", {}}, {"p2", "alpha beta", {}}}, dir.file("pred.jsonl"));
  write_corpus({{"p1", "the cat sat", {}}, {"p2", "alpha beta", {}}}, dir.file("ref.jsonl"));
  const auto result = run_cmd(kBin + " evaluate --pred " + shq(dir.file("pred.jsonl")) +
                              " --ref " + shq(dir.file("ref.jsonl")) + " --tsv " +
                              shq(dir.file("report.tsv")));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("RLSum") != std::string::npos);
  // mean of 2/3 and 1.0
  CHECK(result.output.find("0.8333") != std::string::npos);
  const std::string tsv = test::read_file(dir.file("report.tsv"));
  CHECK(tsv.find("r1_f1") != std::string::npos);
  CHECK(std::filesystem::exists(dir.file("report.tsv.run.json")));
}

TEST_CASE("evaluate with identical files reports all ones") {
  TempDir dir;
  write_corpus({{"a", "some note text.", {}}}, dir.file("pred.jsonl"));
  const auto result = run_cmd(kBin + " evaluate --pred " + shq(dir.file("pred.jsonl")) +
                              " --ref " + shq(dir.file("pred.jsonl")));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("1.0000") != std::string::npos);
}

TEST_CASE("evaluate reports missing ids and exits 2") {
  TempDir dir;
  write_corpus({{"a", "x", {}}}, dir.file("pred.jsonl"));
  write_corpus({{"a", "x", {}}, {"b", "y", {}}}, dir.file("ref.jsonl"));
  const auto result = run_cmd(kBin + " evaluate --pred " + shq(dir.file("pred.jsonl")) +
                              " --ref " + shq(dir.file("ref.jsonl")));
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("\"b\"") != std::string::npos);
}

TEST_CASE("stats prints the nearest-rank percentile") {
  TempDir dir;
  std::string content;
  for (int i = 1; i <= 100; ++i) {
    std::string words;
    for (int w = 0; w < i; ++w) words += "w ";
    content += "{\"input\":\"" + words + "\",\"target\":\"t\"}\n";
  }
  test::write_file(dir.file("masked.jsonl"), content);

  auto run_stats_cmd = [&](const std::string& args) {
    return run_cmd(kBin + " stats --docs " + shq(dir.file("masked.jsonl")) + " " + args);
  };
  CHECK(run_stats_cmd("--field input --percentile 95").output == "95\n");
  CHECK(run_stats_cmd("--field input --percentile 100").output == "100\n");
  CHECK(run_stats_cmd("--field target --percentile 50").output == "1\n");
  CHECK(run_stats_cmd("--field bogus --percentile 50").exit_code == 1);
  CHECK(run_stats_cmd("--field input --percentile 0").exit_code == 1);

  test::write_file(dir.file("empty.jsonl"), "");
  const auto empty = run_cmd(kBin + " stats --docs " + shq(dir.file("empty.jsonl")) +
                             " --field input --percentile 95");
  CHECK(empty.exit_code == 2);
}

TEST_CASE("stats on a single-record corpus returns its length") {
  TempDir dir;
  test::write_file(dir.file("one.jsonl"), "{\"input\":\"a b c\",\"target\":\"x\"}\n");
  const auto result = run_cmd(kBin + " stats --docs " + shq(dir.file("one.jsonl")) +
                              " --field input --percentile 95");
  CHECK(result.output == "3\n");
}

TEST_CASE("flags can come from a key=value config file") {
  TempDir dir;
  test::write_file(dir.file("one.jsonl"), "{\"input\":\"a b c d\",\"target\":\"x\"}\n");
  test::write_file(dir.file("run.cfg"), "docs=" + dir.file("one.jsonl").string() +
                                            "\nfield=input\npercentile=75\n");
  const auto result = run_cmd(kBin + " stats --config " + shq(dir.file("run.cfg")));
  CHECK(result.exit_code == 0);
  CHECK(result.output == "4\n");
  // command-line flags override the file
  const auto overridden =
      run_cmd(kBin + " stats --config " + shq(dir.file("run.cfg")) + " --field target");
  CHECK(overridden.output == "1\n");
}

TEST_CASE("augment drives the full pipeline against a live mock endpoint") {
  test::MockEndpoint mock;
  TempDir dir;
  std::vector<Document> notes;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "note" + std::to_string(i);
    notes.push_back({id, "ECHODIALOGUE\nDoctor: visit " + std::to_string(i) +
                             "\nPatient: details " + std::to_string(i),
                     {}});
  }
  write_corpus(notes, dir.file("notes.jsonl"));
  test::write_file(dir.file("endpoint.cfg"),
                   "base_url = " + mock.base_url() + "\nretry_backoff_ms = 5\n");
  test::write_file(dir.file("exemplar.json"),
                   "{\"note\":\"Example note.\",\"dialogue\":\"Doctor: Hi.\\nPatient: Hi.\"}");

  const std::string cmd = kBin + " augment --notes " + shq(dir.file("notes.jsonl")) +
                          " --endpoint-config " + shq(dir.file("endpoint.cfg")) +
                          " --task B --n 4 --exemplar " + shq(dir.file("exemplar.json")) +
                          " --out " + shq(dir.file("dataset.jsonl"));
  const auto result = run_cmd(cmd);
  INFO(result.output);
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("generated 6") != std::string::npos);
  CHECK(result.output.find("kept 4") != std::string::npos);

  std::istringstream lines(test::read_file(dir.file("dataset.jsonl")));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    const auto record = nlohmann::json::parse(line);
    const std::string note_id = record.at("note_id");
    const auto original =
        std::find_if(notes.begin(), notes.end(),
                     [&](const Document& d) { return d.id == note_id; });
    REQUIRE(original != notes.end());
    CHECK(record.at("target").get<std::string>() == original->text);
    CHECK(record.at("input").get<std::string>().find("Doctor:") != std::string::npos);
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(std::filesystem::exists(dir.file("dataset.jsonl.manifest.jsonl")));
  CHECK(std::filesystem::exists(dir.file("dataset.jsonl.generations.jsonl")));
  CHECK(std::filesystem::exists(dir.file("dataset.jsonl.run.json")));

  const int calls_after_first = mock.total_calls();
  const auto resumed = run_cmd(cmd + " --resume " + shq(dir.file("dataset.jsonl.manifest.jsonl")));
  CHECK(resumed.exit_code == 0);
  CHECK(mock.total_calls() == calls_after_first);
}

TEST_CASE("augment exits 3 when the endpoint is unreachable") {
  TempDir dir;
  write_corpus({{"n1", "some note", {}}}, dir.file("notes.jsonl"));
  test::write_file(dir.file("endpoint.cfg"),
                   "base_url = http://127.0.0.1:1\nmax_retries = 0\nretry_backoff_ms = 1\n");
  test::write_file(dir.file("exemplar.json"),
                   "{\"note\":\"N.\",\"dialogue\":\"Doctor: hi.\"}");
  const auto result = run_cmd(kBin + " augment --notes " + shq(dir.file("notes.jsonl")) +
                              " --endpoint-config " + shq(dir.file("endpoint.cfg")) +
                              " --task B --n 1 --exemplar " + shq(dir.file("exemplar.json")) +
                              " --out " + shq(dir.file("dataset.jsonl")));
  CHECK(result.exit_code == 3);
  // the partial manifest from the failed run is retained
  CHECK(std::filesystem::exists(dir.file("dataset.jsonl.manifest.jsonl")));
}

TEST_CASE("run_evaluate returns the report to callers") {
  TempDir dir;
  write_corpus({{"a", "x y z", {}}}, dir.file("p.jsonl"));
  write_corpus({{"a", "x y q", {}}}, dir.file("r.jsonl"));
  std::ostringstream sink;
  const MetricReport report =
      cli::run_evaluate({dir.file("p.jsonl"), dir.file("r.jsonl"), std::nullopt}, sink);
  CHECK(report.n_pairs == 1);
  CHECK(report.r1.f1 == doctest::Approx(2.0 / 3.0));
}
