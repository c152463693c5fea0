#include "rebel/backend.hpp"

#include <array>

#include <openssl/evp.h>

namespace rebel {

std::string_view to_string(Purpose purpose) {
  switch (purpose) {
    case Purpose::split: return "split";
    case Purpose::memory_check: return "memory_check";
    case Purpose::tool_pick: return "tool_pick";
    case Purpose::tool_input: return "tool_input";
    case Purpose::answer_synthesis: return "answer_synthesis";
  }
  return "unknown";
}

std::optional<Purpose> purpose_from_string(std::string_view name) {
  for (Purpose p : {Purpose::split, Purpose::memory_check, Purpose::tool_pick,
                    Purpose::tool_input, Purpose::answer_synthesis}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

void CompletionRequest::validate() const {
  if (prompt.empty()) throw Error(ErrorCode::precondition, "completion prompt is empty");
  if (max_tokens <= 0) throw Error(ErrorCode::precondition, "max_tokens must be positive");
  if (temperature < 0.0) throw Error(ErrorCode::precondition, "temperature must be >= 0");
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::integrity, "sha256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> completions)
    : completions_(std::move(completions)) {}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  request.validate();
  std::lock_guard lock(mutex_);
  if (next_ >= completions_.size()) {
    throw Error(ErrorCode::replay_exhausted,
                "script exhausted after " + std::to_string(completions_.size()) +
                    " completions (next purpose: " + std::string(to_string(request.purpose)) + ")");
  }
  return completions_[next_++];
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return completions_.size() - next_;
}

ReplayBackend::ReplayBackend(std::vector<TranscriptEntry> entries)
    : entries_(std::move(entries)) {}

std::string ReplayBackend::complete(const CompletionRequest& request) {
  request.validate();
  std::lock_guard lock(mutex_);
  if (next_ >= entries_.size()) {
    throw Error(ErrorCode::replay_exhausted,
                "transcript exhausted after " + std::to_string(entries_.size()) + " entries");
  }
  const TranscriptEntry& entry = entries_[next_];
  const std::string digest = sha256_hex(request.prompt);
  if (digest != entry.prompt_digest) {
    throw Error(ErrorCode::replay_mismatch,
                "prompt diverges from transcript at entry " + std::to_string(entry.index) +
                    " (recorded purpose " + std::string(to_string(entry.purpose)) +
                    ", live purpose " + std::string(to_string(request.purpose)) + ")");
  }
  ++next_;
  return entry.completion;
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - next_;
}

std::string RecordingBackend::complete(const CompletionRequest& request) {
  std::string completion = inner_.complete(request);
  std::lock_guard lock(mutex_);
  entries_.push_back(TranscriptEntry{entries_.size(), request.purpose, sha256_hex(request.prompt),
                                     request.prompt, completion});
  return completion;
}

std::vector<TranscriptEntry> RecordingBackend::transcript() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::string BudgetedBackend::complete(const CompletionRequest& request) {
  {
    std::lock_guard lock(mutex_);
    if (calls_ >= max_calls_) {
      throw Error(ErrorCode::budget_exceeded,
                  "completion budget of " + std::to_string(max_calls_) + " calls exhausted");
    }
    ++calls_;
  }
  return inner_.complete(request);
}

std::size_t BudgetedBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace rebel
