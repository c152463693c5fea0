#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rebel {

enum class ErrorCode {
  precondition,
  config,
  format,
  integrity,
  validation,
  template_error,
  parse,
  unknown_tool,
  unknown_param,
  transport,
  timeout,
  budget_exceeded,
  replay_mismatch,
  replay_exhausted,
  empty_text,
  dimension_mismatch,
  zero_vector,
};

std::string_view to_string(ErrorCode code);

/// Base of every error raised by the library. The code is what callers
/// branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Network or HTTP-level failure. `status` is absent when no response
/// was received at all.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, std::optional<int> status = std::nullopt,
                 std::string body_prefix = {})
      : Error(ErrorCode::transport, message),
        status_(status),
        body_prefix_(std::move(body_prefix)) {}

  std::optional<int> status() const noexcept { return status_; }
  const std::string& body_prefix() const noexcept { return body_prefix_; }

 private:
  std::optional<int> status_;
  std::string body_prefix_;
};

/// Malformed input document; `line` is 1-based when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : Error(ErrorCode::format,
              line ? "line " + std::to_string(*line) + ": " + message : message),
        line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

}  // namespace rebel
