#include "rebel/http.hpp"

#include <chrono>

#include "httplib.h"

namespace rebel::http {

Url parse_url(std::string_view url) {
  Url out;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::validation, "not an absolute URL: " + std::string(url));
  }
  out.scheme = std::string(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") {
    throw Error(ErrorCode::validation, "unsupported URL scheme: " + out.scheme);
  }
  const auto rest = url.substr(sep + 3);
  const auto target_start = rest.find_first_of("/?");
  out.authority = std::string(rest.substr(0, target_start));
  if (out.authority.empty()) {
    throw Error(ErrorCode::validation, "URL has no host: " + std::string(url));
  }
  if (target_start == std::string_view::npos) {
    out.target = "/";
  } else {
    out.target = std::string(rest.substr(target_start));
    if (out.target.front() == '?') out.target.insert(out.target.begin(), '/');
  }
  const auto hash = out.target.find('#');
  if (hash != std::string::npos) out.target.erase(hash);
  return out;
}

Response send(const Request& request, double timeout_seconds) {
  const Url url = parse_url(request.url);
  httplib::Client client(url.origin());
  const auto timeout = std::chrono::duration<double>(timeout_seconds);
  const auto as_micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  client.set_connection_timeout(as_micros);
  client.set_read_timeout(as_micros);
  client.set_write_timeout(as_micros);

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  const auto started = std::chrono::steady_clock::now();
  httplib::Result result = request.method == HttpMethod::get
                               ? client.Get(url.target, headers)
                               : client.Post(url.target, headers, request.body,
                                             request.content_type);
  if (!result) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || elapsed >= timeout) {
      throw Error(ErrorCode::timeout, "request to " + url.origin() + " timed out");
    }
    throw TransportError("request to " + url.origin() + " failed: " + httplib::to_string(err));
  }
  return Response{result->status, result->body};
}

}  // namespace rebel::http
