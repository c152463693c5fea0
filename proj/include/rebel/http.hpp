#pragma once

#include <string>
#include <string_view>

#include "rebel/core.hpp"

namespace rebel::http {

struct Url {
  std::string scheme;     // "http" or "https"
  std::string authority;  // host[:port]
  std::string target;     // path plus query, at least "/"

  std::string origin() const { return scheme + "://" + authority; }
};

/// Throws ErrorCode::validation for anything but an absolute http(s) URL.
Url parse_url(std::string_view url);

struct Response {
  int status = 0;
  std::string body;
};

struct Request {
  HttpMethod method = HttpMethod::get;
  std::string url;
  ParamList headers;
  std::string body;
  std::string content_type;
};

/// Performs one request. Connection failures raise TransportError with no
/// status; hitting the deadline raises Error(ErrorCode::timeout). Non-2xx
/// responses are returned, not thrown.
Response send(const Request& request, double timeout_seconds);

}  // namespace rebel::http
