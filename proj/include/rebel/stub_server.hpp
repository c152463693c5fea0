#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rebel {

/// One canned response. Requests match on method and the exact raw
/// request target (path plus query string); POST routes may also pin the
/// exact body.
struct StubRoute {
  std::string method = "GET";
  std::string target;
  std::optional<std::string> request_body;
  int status = 200;
  std::string response;
  std::size_t repeat = 1;  // response text is repeated this many times
  double delay_seconds = 0.0;
};

/// Reads {"routes": [{"method", "target", "request_body", "status",
/// "response", "repeat", "delay_seconds"}]}. Throws FormatError.
std::vector<StubRoute> load_stub_routes(std::istream& in);

/// Local HTTP server standing in for real tool APIs in tests and demos.
/// Unmatched requests get a 404 whose body names the target.
class StubToolServer {
 public:
  explicit StubToolServer(std::vector<StubRoute> routes);
  ~StubToolServer();

  StubToolServer(const StubToolServer&) = delete;
  StubToolServer& operator=(const StubToolServer&) = delete;

  /// Binds 127.0.0.1 (port 0 picks a free one), serves on a background
  /// thread and returns the bound port.
  int start(int port = 0);
  void stop();

  int port() const;
  std::string base_url() const;

  /// "METHOD target" for every request received, in arrival order.
  std::vector<std::string> requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rebel
