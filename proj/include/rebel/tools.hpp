#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rebel/core.hpp"

namespace rebel {

/// A fully assembled HTTP call for one tool invocation.
struct ToolRequest {
  HttpMethod method = HttpMethod::get;
  std::string url;
  std::optional<std::string> body;  // POST only
  std::string content_type;         // POST only
  ParamList headers;
};

/// Reads the tool-config document:
///
///   {"tools": [{"name": ..., "description": ..., "method": "GET"|"POST",
///               "endpoint": ..., "dynamic_params": {name: description},
///               "static_params": {name: value}, "headers": {name: value},
///               "post_encoding": "json"|"form", "id": n}]}
///
/// `${VAR}` inside endpoints, static values and header values expands from
/// the environment. Ids default to position (1-based). An empty document
/// yields an empty registry. Throws FormatError or
/// Error(ErrorCode::validation).
std::vector<ToolSpec> load_registry(std::istream& in);

/// Expands `${VAR}` references. Throws ErrorCode::validation when a
/// variable is unset.
std::string expand_env(std::string_view value);

/// RFC 3986 component encoding: unreserved characters pass through,
/// everything else becomes %XX with uppercase hex.
std::string percent_encode(std::string_view value);

/// Merges static then dynamic parameters, each in declaration order.
/// Throws ErrorCode::unknown_param if `input` has an undeclared key.
ParamList merged_params(const ToolSpec& spec, const ToolInput& input);

ToolRequest build_request(const ToolSpec& spec, const ToolInput& input);

/// Issues tool requests. Swappable so the engine can run against fakes.
class ToolExecutor {
 public:
  virtual ~ToolExecutor() = default;
  virtual std::string execute(const ToolRequest& request, double timeout_seconds) = 0;
};

/// Real HTTP execution. Returns the body as UTF-8 (invalid bytes replaced)
/// for any 2xx status; otherwise throws TransportError carrying the status
/// and a prefix of the body. Deadline overruns raise ErrorCode::timeout.
class HttpToolExecutor final : public ToolExecutor {
 public:
  std::string execute(const ToolRequest& request, double timeout_seconds) override;
};

/// Keeps at most `limit` code points, cutting only at code point
/// boundaries.
std::string truncate(std::string_view body, std::size_t limit);

}  // namespace rebel
