#include "forge/augmentor.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "forge/corpus_io.hpp"
#include "forge/error.hpp"
#include "forge/segmenter.hpp"
#include "forge/textutil.hpp"

namespace forge {

using njson = nlohmann::ordered_json;

Task task_from_string(const std::string& s) {
  if (s == "B" || s == "b") return Task::B;
  if (s == "C" || s == "c") return Task::C;
  throw config_error("unknown task \"" + s + "\" (expected B or C)");
}

std::string to_string(Task task) { return task == Task::B ? "B" : "C"; }

std::string to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::Ok: return "ok";
    case OutcomeStatus::ContentFiltered: return "content_filtered";
    case OutcomeStatus::ExhaustedRetries: return "exhausted_retries";
    case OutcomeStatus::EmptyResponse: return "empty";
  }
  return "empty";
}

OutcomeStatus outcome_status_from_string(const std::string& s) {
  if (s == "ok") return OutcomeStatus::Ok;
  if (s == "content_filtered") return OutcomeStatus::ContentFiltered;
  if (s == "exhausted_retries") return OutcomeStatus::ExhaustedRetries;
  if (s == "empty") return OutcomeStatus::EmptyResponse;
  throw data_error("unknown outcome status \"" + s + "\"");
}

namespace {

constexpr const char* kStage1Guidelines =
    "You are simulating a consultation between a doctor and a patient.\n"
    "Given a clinical note, write a fictitious conversation between the doctor and the patient"
    " that covers the information in the note.\n"
    "Guidelines:\n"
    "- Put each turn on its own line, starting with \"Doctor:\" or \"Patient:\".\n"
    "- Alternate speakers naturally; the doctor asks questions, the patient answers.\n"
    "- Cover every clinically relevant fact from the note and do not contradict it.\n"
    "- Use plain conversational language, including hesitations such as \"um\", \"uh\" and"
    " \"hmm\".\n"
    "- Output only the conversation, with no headings or commentary.";

constexpr const char* kStage2Instruction =
    "Rewrite the following doctor-patient conversation so it sounds more natural by inserting"
    " conversational fillers such as \"um\", \"uh\" and \"hmm\".\n"
    "Keep every medical fact, the order of the turns and the \"Doctor:\"/\"Patient:\" line"
    " format exactly as they are; change nothing else.\n"
    "Output only the rewritten conversation.";

long long parse_int_value(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("endpoint config: bad integer for " + key + ": \"" + value + "\"");
  }
}

double parse_double_value(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("endpoint config: bad number for " + key + ": \"" + value + "\"");
  }
}

}  // namespace

ChatEndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open endpoint config " + path.string());
  ChatEndpointConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = trim_view(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos)
      throw config_error(path.string() + ":" + std::to_string(line_no) +
                         ": expected key=value");
    const std::string key(trim_view(trimmed.substr(0, eq)));
    const std::string value(trim_view(trimmed.substr(eq + 1)));
    if (key == "base_url") config.base_url = value;
    else if (key == "model") config.model_name = value;
    else if (key == "temperature") config.temperature = parse_double_value(key, value);
    else if (key == "max_tokens")
      config.max_output_tokens = static_cast<std::size_t>(parse_int_value(key, value));
    else if (key == "api_key_env") config.api_key_env = value;
    else if (key == "max_retries")
      config.max_retries = static_cast<std::size_t>(parse_int_value(key, value));
    else if (key == "max_in_flight")
      config.max_in_flight = static_cast<std::size_t>(parse_int_value(key, value));
    else if (key == "min_request_interval_ms")
      config.min_request_interval = std::chrono::milliseconds(parse_int_value(key, value));
    else if (key == "retry_backoff_ms")
      config.retry_backoff = std::chrono::milliseconds(parse_int_value(key, value));
    else if (key == "input_token_limit")
      config.input_token_limit = static_cast<std::size_t>(parse_int_value(key, value));
    else
      throw config_error(path.string() + ":" + std::to_string(line_no) + ": unknown key \"" +
                         key + "\"");
  }
  if (config.base_url.empty())
    throw config_error(path.string() + ": base_url is required");
  if (config.max_in_flight == 0)
    throw config_error(path.string() + ": max_in_flight must be >= 1");
  return config;
}

PromptTemplate default_prompt_template() {
  PromptTemplate tmpl;
  tmpl.stage1_guidelines = kStage1Guidelines;
  tmpl.stage2_instruction = kStage2Instruction;
  return tmpl;
}

Exemplar load_exemplar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open exemplar file " + path.string());
  njson record;
  try {
    in >> record;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path.string() + ": malformed exemplar JSON: " + e.what());
  }
  Exemplar exemplar;
  try {
    exemplar.note = record.at("note").get<std::string>();
    exemplar.dialogue = record.at("dialogue").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path.string() + ": exemplar needs \"note\" and \"dialogue\": " + e.what());
  }
  if (trim_view(exemplar.note).empty() || trim_view(exemplar.dialogue).empty())
    throw data_error(path.string() + ": exemplar note and dialogue must be non-empty");
  return exemplar;
}

std::vector<ChatMessage> build_stage1_prompt(const std::string& note, const Exemplar& exemplar,
                                             const PromptTemplate& tmpl, std::size_t* truncated) {
  if (trim_view(note).empty()) throw data_error("build_stage1_prompt: empty target note");
  if (trim_view(exemplar.dialogue).empty())
    throw data_error("build_stage1_prompt: empty exemplar dialogue");
  auto clip = [&](const std::string& text) {
    if (!tmpl.note_token_limit) return text;
    std::string cut = truncate_tokens(text, *tmpl.note_token_limit);
    if (cut.size() < text.size() && truncated) ++*truncated;
    return cut;
  };
  return {
      {"system", tmpl.stage1_guidelines},
      {"user", clip(exemplar.note)},
      {"assistant", exemplar.dialogue},
      {"user", clip(note)},
  };
}

std::vector<ChatMessage> build_stage2_prompt(const std::string& stage1_dialogue,
                                             const PromptTemplate& tmpl) {
  if (trim_view(stage1_dialogue).empty())
    throw data_error("build_stage2_prompt: empty stage-1 dialogue");
  return {
      {"system", tmpl.stage2_instruction},
      {"user", stage1_dialogue},
  };
}

// ---------------------------------------------------------------------------
// Endpoint client

struct ChatClient::Impl {
  // One connection per in-flight slot; httplib serializes requests that
  // share a client, so real concurrency needs a pool.
  std::vector<std::unique_ptr<httplib::Client>> pool;
  std::vector<std::size_t> free_clients;
  std::string path;
  std::string api_key;

  std::mutex mu;
  std::condition_variable cv;

  std::mutex pace_mu;
  std::chrono::steady_clock::time_point next_allowed = std::chrono::steady_clock::now();
};

namespace {

// scheme://host[:port] and the path prefix, if any.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw config_error("base_url must start with http:// or https://: " + base_url);
  const std::size_t path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace

ChatClient::ChatClient(ChatEndpointConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  if (config_.max_in_flight == 0) throw config_error("max_in_flight must be >= 1");
  auto [origin, prefix] = split_base_url(config_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin.rfind("https://", 0) == 0)
    throw config_error("this build has no TLS support; use an http:// endpoint");
#endif
  for (std::size_t i = 0; i < config_.max_in_flight; ++i) {
    auto client = std::make_unique<httplib::Client>(origin);
    client->set_connection_timeout(10, 0);
    client->set_read_timeout(300, 0);
    client->set_write_timeout(60, 0);
    impl_->pool.push_back(std::move(client));
    impl_->free_clients.push_back(i);
  }
  impl_->path = prefix + "/chat/completions";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw config_error("environment variable " + config_.api_key_env +
                         " is not set (expected the API key)");
    impl_->api_key = key;
  }
}

ChatClient::~ChatClient() = default;

namespace {

// Checks a pooled connection out for the duration of one call.
struct InFlightSlot {
  ChatClient::Impl& impl;
  std::size_t index;

  explicit InFlightSlot(ChatClient::Impl& i) : impl(i) {
    std::unique_lock lock(impl.mu);
    impl.cv.wait(lock, [&] { return !impl.free_clients.empty(); });
    index = impl.free_clients.back();
    impl.free_clients.pop_back();
  }
  ~InFlightSlot() {
    {
      std::lock_guard lock(impl.mu);
      impl.free_clients.push_back(index);
    }
    impl.cv.notify_one();
  }

  httplib::Client& client() { return *impl.pool[index]; }
};

bool has_content_filter_code(const njson& body) {
  if (!body.is_object() || !body.contains("error")) return false;
  const auto& err = body.at("error");
  return err.is_object() && err.value("code", std::string{}) == "content_filter";
}

}  // namespace

CallResult ChatClient::call(const std::vector<ChatMessage>& messages) {
  njson body;
  body["model"] = config_.model_name;
  body["messages"] = njson::array();
  for (const ChatMessage& m : messages)
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_output_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

  InFlightSlot slot(*impl_);
  CallResult result;
  for (std::size_t attempt = 0;; ++attempt) {
    if (config_.min_request_interval.count() > 0) {
      // Serializes request starts; the stamp is taken after the sleep so
      // wakeup latency widens gaps instead of compressing the next one. The
      // slack keeps the spacing intact on the receiving side even when the
      // sender is preempted between the stamp and the socket write.
      const auto slack = std::max(config_.min_request_interval / 5,
                                  std::chrono::milliseconds(2));
      std::lock_guard lock(impl_->pace_mu);
      auto now = std::chrono::steady_clock::now();
      if (impl_->next_allowed > now) {
        std::this_thread::sleep_until(impl_->next_allowed);
        now = std::chrono::steady_clock::now();
      }
      impl_->next_allowed = now + config_.min_request_interval + slack;
    }

    auto res = slot.client().Post(impl_->path, headers, payload, "application/json");
    if (!res) {
      if (attempt >= config_.max_retries)
        throw endpoint_error("endpoint unreachable after " + std::to_string(attempt) +
                             " retries: " + httplib::to_string(res.error()));
      std::this_thread::sleep_for(config_.retry_backoff * (1u << std::min<std::size_t>(attempt, 10)));
      ++result.retries;
      continue;
    }

    njson parsed;
    const bool parse_ok = [&] {
      try {
        parsed = njson::parse(res->body);
        return true;
      } catch (const nlohmann::json::exception&) {
        return false;
      }
    }();

    if (parse_ok && has_content_filter_code(parsed)) {
      result.status = OutcomeStatus::ContentFiltered;
      result.detail = res->body;
      return result;
    }
    if (res->status == 429 || res->status >= 500) {
      if (attempt >= config_.max_retries) {
        result.status = OutcomeStatus::ExhaustedRetries;
        result.detail = "HTTP " + std::to_string(res->status);
        return result;
      }
      std::this_thread::sleep_for(config_.retry_backoff * (1u << std::min<std::size_t>(attempt, 10)));
      ++result.retries;
      continue;
    }
    if (res->status != 200)
      throw endpoint_error("HTTP " + std::to_string(res->status) + " from " + config_.base_url +
                           ": " + res->body.substr(0, 200));

    std::string content;
    if (parse_ok && parsed.contains("choices") && parsed["choices"].is_array() &&
        !parsed["choices"].empty()) {
      const auto& choice = parsed["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content") &&
          choice["message"]["content"].is_string())
        content = choice["message"]["content"].get<std::string>();
    }
    if (trim_view(content).empty()) {
      result.status = OutcomeStatus::EmptyResponse;
      result.detail = res->body;
      return result;
    }
    result.status = OutcomeStatus::Ok;
    result.text = std::move(content);
    return result;
  }
}

// ---------------------------------------------------------------------------
// Transcript handling

std::optional<Dialogue> parse_transcript(const std::string& note_id, const std::string& text,
                                         Provenance provenance) {
  Dialogue dialogue;
  dialogue.note_id = note_id;
  dialogue.provenance = provenance;

  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line =
        std::string_view(text).substr(start, (nl == std::string::npos ? text.size() : nl) - start);
    const std::string_view trimmed = trim_view(line);
    const std::string lowered = to_lower_ascii(trimmed.substr(0, 8));
    if (lowered.rfind("doctor:", 0) == 0) {
      dialogue.turns.push_back(
          {Speaker::Doctor, std::string(trim_view(trimmed.substr(7)))});
    } else if (lowered.rfind("patient:", 0) == 0) {
      dialogue.turns.push_back(
          {Speaker::Patient, std::string(trim_view(trimmed.substr(8)))});
    } else if (!trimmed.empty() && !dialogue.turns.empty()) {
      std::string& prev = dialogue.turns.back().text;
      if (!prev.empty()) prev.push_back('\n');
      prev.append(trimmed);
    }
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  if (dialogue.turns.empty()) return std::nullopt;
  return dialogue;
}

std::string flatten_dialogue(const Dialogue& dialogue) {
  std::string out;
  for (const DialogueTurn& turn : dialogue.turns) {
    if (!out.empty()) out.push_back('\n');
    out += turn.speaker == Speaker::Doctor ? "Doctor: " : "Patient: ";
    out += turn.text;
  }
  return out;
}

GenerationOutcome generate_dialogue(ChatClient& client, const Document& note,
                                    const Exemplar& exemplar, const PromptTemplate& tmpl,
                                    Task task) {
  GenerationOutcome outcome;
  outcome.stage = 1;
  outcome.request_id = note.id + "#stage1";

  std::size_t truncated = 0;
  const CallResult stage1 =
      client.call(build_stage1_prompt(note.text, exemplar, tmpl, &truncated));
  outcome.note_truncated = truncated > 0;
  if (stage1.status != OutcomeStatus::Ok) {
    outcome.status = stage1.status;
    outcome.raw_text = stage1.detail;
    return outcome;
  }
  auto dialogue = parse_transcript(note.id, stage1.text, Provenance::SyntheticStage1);
  if (!dialogue) {
    outcome.status = OutcomeStatus::EmptyResponse;
    outcome.raw_text = stage1.text;
    return outcome;
  }
  if (task == Task::B) {
    outcome.status = OutcomeStatus::Ok;
    outcome.dialogue = std::move(dialogue);
    return outcome;
  }

  outcome.stage = 2;
  outcome.request_id = note.id + "#stage2";
  const CallResult stage2 = client.call(build_stage2_prompt(flatten_dialogue(*dialogue), tmpl));
  if (stage2.status != OutcomeStatus::Ok) {
    outcome.status = stage2.status;
    outcome.raw_text = stage2.detail;
    return outcome;
  }
  auto refined = parse_transcript(note.id, stage2.text, Provenance::SyntheticStage2);
  if (!refined) {
    outcome.status = OutcomeStatus::EmptyResponse;
    outcome.raw_text = stage2.text;
    return outcome;
  }
  outcome.status = OutcomeStatus::Ok;
  outcome.dialogue = std::move(refined);
  return outcome;
}

// ---------------------------------------------------------------------------
// Batch run with crash-safe manifest

namespace {

njson manifest_record(const ManifestEntry& entry) {
  njson record;
  record["note_id"] = entry.note_id;
  record["status"] = to_string(entry.status);
  record["stage"] = entry.stage ? njson(*entry.stage) : njson(nullptr);
  record["rank_score"] = entry.rank_score ? njson(*entry.rank_score) : njson(nullptr);
  return record;
}

njson dialogue_record(const Dialogue& d) {
  njson record;
  record["note_id"] = d.note_id;
  record["turns"] = njson::array();
  for (const DialogueTurn& t : d.turns)
    record["turns"].push_back({{"speaker", to_string(t.speaker)}, {"text", t.text}});
  record["provenance"] = to_string(d.provenance);
  record["rank_score"] = d.rank_score ? njson(*d.rank_score) : njson(nullptr);
  return record;
}

}  // namespace

std::vector<ManifestEntry> load_generation_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    try {
      const njson record = njson::parse(line);
      ManifestEntry entry;
      entry.note_id = record.at("note_id").get<std::string>();
      entry.status = outcome_status_from_string(record.at("status").get<std::string>());
      if (record.contains("stage") && !record.at("stage").is_null())
        entry.stage = record.at("stage").get<int>();
      if (record.contains("rank_score") && !record.at("rank_score").is_null())
        entry.rank_score = record.at("rank_score").get<double>();
      entries.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": bad manifest record: " +
                       e.what());
    }
  }
  return entries;
}

void write_generation_manifest(const std::vector<ManifestEntry>& entries,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write manifest " + path.string());
  for (const ManifestEntry& entry : entries) out << manifest_record(entry).dump() << '\n';
  out.flush();
  if (!out) throw data_error("write failed for " + path.string());
}

AugmentationResult run_augmentation(const std::vector<Document>& notes, ChatClient& client,
                                    const Exemplar& exemplar, const PromptTemplate& tmpl,
                                    Task task, const AugmentPaths& paths, bool resume) {
  std::vector<const Document*> ordered;
  ordered.reserve(notes.size());
  for (const Document& note : notes) ordered.push_back(&note);
  std::sort(ordered.begin(), ordered.end(),
            [](const Document* a, const Document* b) { return a->id < b->id; });

  std::map<std::string, ManifestEntry> completed;
  std::map<std::string, Dialogue> prior;
  if (resume && std::filesystem::exists(paths.manifest)) {
    for (ManifestEntry& entry : load_generation_manifest(paths.manifest))
      completed[entry.note_id] = std::move(entry);
    if (std::filesystem::exists(paths.generations))
      for (Dialogue& d : load_dialogues(paths.generations)) prior[d.note_id] = std::move(d);
    for (const auto& [id, entry] : completed)
      if (entry.status == OutcomeStatus::Ok && !prior.count(id))
        throw data_error("resume mismatch: manifest marks \"" + id +
                         "\" ok but the generations file has no dialogue for it");
    for (const auto& [id, d] : prior) {
      auto it = completed.find(id);
      if (it == completed.end() || it->second.status != OutcomeStatus::Ok)
        throw data_error("resume mismatch: generations file has \"" + id +
                         "\" without an ok manifest entry");
    }
  }

  const auto mode = completed.empty() ? std::ios::trunc : std::ios::app;
  std::ofstream manifest_out(paths.manifest, std::ios::binary | mode);
  if (!manifest_out) throw data_error("cannot write manifest " + paths.manifest.string());
  std::ofstream generations_out(paths.generations, std::ios::binary | mode);
  if (!generations_out)
    throw data_error("cannot write generations " + paths.generations.string());

  struct Slot {
    ManifestEntry entry;
    std::optional<Dialogue> dialogue;
    bool from_resume = false;
    bool note_truncated = false;
  };
  std::vector<std::optional<Slot>> slots(ordered.size());

  std::mutex write_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= ordered.size()) return;
      const Document& note = *ordered[i];
      try {
        Slot slot;
        auto done = completed.find(note.id);
        if (done != completed.end()) {
          slot.entry = done->second;
          slot.from_resume = true;
          auto d = prior.find(note.id);
          if (d != prior.end()) slot.dialogue = d->second;
        } else {
          GenerationOutcome outcome = generate_dialogue(client, note, exemplar, tmpl, task);
          slot.entry = {note.id, outcome.status, outcome.stage, std::nullopt};
          slot.dialogue = std::move(outcome.dialogue);
          slot.note_truncated = outcome.note_truncated;
          std::lock_guard lock(write_mu);
          manifest_out << manifest_record(slot.entry).dump() << '\n';
          manifest_out.flush();
          if (slot.dialogue) {
            generations_out << dialogue_record(*slot.dialogue).dump() << '\n';
            generations_out.flush();
          }
        }
        slots[i] = std::move(slot);
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

  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min(client.config().max_in_flight, ordered.size()));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  AugmentationResult result;
  for (std::optional<Slot>& slot : slots) {
    if (!slot) continue;
    if (slot->from_resume) ++result.skipped;
    if (slot->note_truncated) ++result.truncated_notes;
    if (slot->dialogue) result.dialogues.push_back(std::move(*slot->dialogue));
    result.entries.push_back(std::move(slot->entry));
  }
  return result;
}

std::vector<Dialogue> rank_generations(std::vector<Dialogue> candidates,
                                       const std::vector<std::string>& training_refs,
                                       std::size_t n, RougeVariant variant) {
  if (training_refs.empty()) throw data_error("rank_generations: no training references");
  for (Dialogue& d : candidates) {
    const std::string flat = flatten_dialogue(d);
    double sum = 0.0;
    for (const std::string& ref : training_refs) sum += rouge_score(flat, ref, variant).f1;
    d.rank_score = sum / static_cast<double>(training_refs.size());
  }
  std::sort(candidates.begin(), candidates.end(), [](const Dialogue& a, const Dialogue& b) {
    if (*a.rank_score != *b.rank_score) return *a.rank_score > *b.rank_score;
    return a.note_id < b.note_id;
  });
  if (candidates.size() > n) candidates.resize(n);
  return candidates;
}

}  // namespace forge
