#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/rouge.hpp"
#include "forge/types.hpp"

namespace forge {

enum class Task { B, C };

Task task_from_string(const std::string& s);
std::string to_string(Task task);

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatEndpointConfig {
  std::string base_url;               // e.g. http://127.0.0.1:8080/v1
  std::string model_name = "gpt-35-turbo";
  double temperature = 0.7;
  std::size_t max_output_tokens = 1024;
  std::string api_key_env;            // empty: send no Authorization header
  std::size_t max_retries = 5;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds min_request_interval{0};
  std::chrono::milliseconds retry_backoff{250};
  std::optional<std::size_t> input_token_limit;  // notes above it are truncated
};

// Plain-text key=value lines; unknown keys are rejected.
ChatEndpointConfig load_endpoint_config(const std::filesystem::path& path);

struct PromptTemplate {
  std::string stage1_guidelines;
  std::string stage2_instruction;
  std::optional<std::size_t> note_token_limit;  // truncate long notes, with a warning
};

PromptTemplate default_prompt_template();

// Single fixed exemplar used for one-shot prompting.
struct Exemplar {
  std::string note;
  std::string dialogue;  // "Doctor:"/"Patient:" tagged transcript
};

// JSON file {"note": str, "dialogue": str}.
Exemplar load_exemplar(const std::filesystem::path& path);

// [system guidelines, user exemplar note, assistant exemplar dialogue,
// user target note]. Notes longer than the token limit are truncated; the
// count of truncations is reported through `truncated` when given.
std::vector<ChatMessage> build_stage1_prompt(const std::string& note, const Exemplar& exemplar,
                                             const PromptTemplate& tmpl,
                                             std::size_t* truncated = nullptr);

// [system filler instruction, user stage-1 dialogue].
std::vector<ChatMessage> build_stage2_prompt(const std::string& stage1_dialogue,
                                             const PromptTemplate& tmpl);

enum class OutcomeStatus { Ok, ContentFiltered, ExhaustedRetries, EmptyResponse };

std::string to_string(OutcomeStatus status);
OutcomeStatus outcome_status_from_string(const std::string& s);

struct GenerationOutcome {
  OutcomeStatus status = OutcomeStatus::EmptyResponse;
  std::optional<Dialogue> dialogue;  // set iff status == Ok
  int stage = 1;                     // stage that decided the outcome
  std::string request_id;            // "<note_id>#stage<k>"
  std::string raw_text;              // unparseable transcripts, for the log
  bool note_truncated = false;       // the prompt clipped the note
};

struct CallResult {
  OutcomeStatus status = OutcomeStatus::EmptyResponse;
  std::string text;
  std::size_t retries = 0;
  std::string detail;
};

// Chat-completions client: POST {base_url}/chat/completions with body
// {"model", "messages", "temperature", "max_tokens"}; the reply text is
// read from choices[0].message.content. Transient failures (HTTP 429/5xx)
// are retried with exponential backoff; an error code "content_filter"
// maps to ContentFiltered. Thread-safe; enforces max_in_flight and
// min_request_interval across threads.
class ChatClient {
 public:
  explicit ChatClient(ChatEndpointConfig config);
  ~ChatClient();

  ChatClient(const ChatClient&) = delete;
  ChatClient& operator=(const ChatClient&) = delete;

  CallResult call(const std::vector<ChatMessage>& messages);

  const ChatEndpointConfig& config() const { return config_; }

  struct Impl;

 private:
  ChatEndpointConfig config_;
  std::unique_ptr<Impl> impl_;
};

// "Doctor:"/"Patient:" tagged lines (case-insensitive) to turns; lines
// without a tag continue the current turn. Nullopt when no tag is found.
std::optional<Dialogue> parse_transcript(const std::string& note_id, const std::string& text,
                                         Provenance provenance);

std::string flatten_dialogue(const Dialogue& dialogue);

// Stage 1 always runs; stage 2 only for task C.
GenerationOutcome generate_dialogue(ChatClient& client, const Document& note,
                                    const Exemplar& exemplar, const PromptTemplate& tmpl,
                                    Task task);

struct ManifestEntry {
  std::string note_id;
  OutcomeStatus status = OutcomeStatus::EmptyResponse;
  std::optional<int> stage;
  std::optional<double> rank_score;
};

// Manifest: JSONL {"note_id", "status", "stage", "rank_score"}.
std::vector<ManifestEntry> load_generation_manifest(const std::filesystem::path& path);
void write_generation_manifest(const std::vector<ManifestEntry>& entries,
                               const std::filesystem::path& path);

struct AugmentPaths {
  std::filesystem::path manifest;
  std::filesystem::path generations;  // dialogues.jsonl of successful outputs
};

struct AugmentationResult {
  std::vector<ManifestEntry> entries;  // note-id order
  std::vector<Dialogue> dialogues;     // successes, including resumed ones
  std::size_t skipped = 0;             // resumed notes, no endpoint call made
  std::size_t truncated_notes = 0;     // notes clipped to the input token limit
};

// Processes notes in id order; every outcome is appended to the manifest
// (and successful dialogues to the generations file) as soon as it lands,
// so an interrupted run resumes without re-calling the endpoint for
// completed ids. Issues up to config.max_in_flight requests concurrently.
AugmentationResult run_augmentation(const std::vector<Document>& notes, ChatClient& client,
                                    const Exemplar& exemplar, const PromptTemplate& tmpl,
                                    Task task, const AugmentPaths& paths, bool resume);

// rank_score = mean ROUGE F1 (default R1) of the flattened dialogue against
// every training reference; descending score, note_id tie-break, top n.
std::vector<Dialogue> rank_generations(std::vector<Dialogue> candidates,
                                       const std::vector<std::string>& training_refs,
                                       std::size_t n, RougeVariant variant = RougeVariant::R1);

}  // namespace forge
