#pragma once

#include <cstddef>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rebel/errors.hpp"

namespace rebel {

/// Which pipeline step issued a completion. Carried into transcripts.
enum class Purpose { split, memory_check, tool_pick, tool_input, answer_synthesis };

std::string_view to_string(Purpose purpose);
std::optional<Purpose> purpose_from_string(std::string_view name);

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
  Purpose purpose = Purpose::answer_synthesis;

  /// Throws ErrorCode::precondition on an empty prompt or bad numbers.
  void validate() const;
};

/// Source of text completions. Implementations must tolerate concurrent
/// calls from independent engine runs.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// Returns the completion verbatim, without trimming.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Hands out a fixed list of completions in order, ignoring prompts.
/// Useful for authoring runs by hand before they have digests.
class ScriptedBackend final : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> completions);

  std::string complete(const CompletionRequest& request) override;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> completions_;
  std::size_t next_ = 0;
};

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

struct TranscriptEntry {
  std::size_t index = 0;
  Purpose purpose = Purpose::answer_synthesis;
  std::string prompt_digest;  // lowercase hex SHA-256 of `prompt`
  std::string prompt;
  std::string completion;

  bool operator==(const TranscriptEntry&) const = default;
};

std::string sha256_hex(std::string_view data);

/// Parses the line-delimited transcript format. The header line is
/// optional; when present it must name this format, version 1 and the
/// sha256-hex digest. Throws FormatError (with line number) or
/// Error(ErrorCode::integrity) on digest mismatches and index gaps.
std::vector<TranscriptEntry> load_transcript(std::istream& in);

/// Writes the header line followed by one JSON object per entry.
void write_transcript(std::ostream& out, std::span<const TranscriptEntry> entries);

/// Serves completions from a recorded transcript, verifying that each
/// live prompt hashes to the digest stored at that position.
class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries);

  std::string complete(const CompletionRequest& request) override;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
};

/// Forwards to another backend and appends every exchange to a transcript.
class RecordingBackend final : public CompletionBackend {
 public:
  explicit RecordingBackend(CompletionBackend& inner) : inner_(inner) {}

  std::string complete(const CompletionRequest& request) override;
  std::vector<TranscriptEntry> transcript() const;

 private:
  CompletionBackend& inner_;
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
};

/// Caps the number of completions forwarded. The call that would exceed
/// the cap raises Error(ErrorCode::budget_exceeded) without reaching the
/// inner backend.
class BudgetedBackend final : public CompletionBackend {
 public:
  BudgetedBackend(CompletionBackend& inner, std::size_t max_calls)
      : inner_(inner), max_calls_(max_calls) {}

  std::string complete(const CompletionRequest& request) override;
  std::size_t calls() const;

 private:
  CompletionBackend& inner_;
  std::size_t max_calls_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Remote text-completion API
// ---------------------------------------------------------------------------

/// Everything provider-specific lives here so no vendor is hardcoded.
/// Request field names set to an empty string are left out of the body.
struct HttpBackendConfig {
  std::string endpoint;
  std::string api_key_env;  // name of the variable holding the key
  std::string auth_header = "Authorization";
  std::string auth_scheme = "Bearer";
  std::string model;
  std::string model_field = "model";
  std::string prompt_field = "prompt";
  std::string max_tokens_field = "max_tokens";
  std::string temperature_field = "temperature";
  std::string stop_field = "stop";
  std::string response_pointer = "/choices/0/text";  // JSON pointer
  double timeout_seconds = 60.0;
  int max_retries = 2;
  int backoff_ms = 500;  // doubled after every failed attempt
};

class HttpCompletionBackend final : public CompletionBackend {
 public:
  /// Resolves the API key from the environment; throws ErrorCode::config
  /// when a named variable is unset.
  explicit HttpCompletionBackend(HttpBackendConfig config);

  std::string complete(const CompletionRequest& request) override;

  /// The JSON body that would be sent for `request`.
  std::string request_body(const CompletionRequest& request) const;

 private:
  HttpBackendConfig config_;
  std::string api_key_;
};

}  // namespace rebel
