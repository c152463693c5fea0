#include "rebel/stub_server.hpp"

#include <chrono>
#include <istream>
#include <iterator>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rebel/errors.hpp"

namespace rebel {

std::vector<StubRoute> load_stub_routes(std::istream& in) {
  const std::string doc{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid stub routes: ") + e.what());
  }
  if (!root.is_object() || !root.contains("routes") || !root["routes"].is_array()) {
    throw FormatError("stub routes document needs a 'routes' array");
  }
  std::vector<StubRoute> routes;
  for (const auto& r : root["routes"]) {
    try {
      StubRoute route;
      route.method = r.value("method", "GET");
      route.target = r.at("target").get<std::string>();
      if (r.contains("request_body")) route.request_body = r["request_body"].get<std::string>();
      route.status = r.value("status", 200);
      route.response = r.value("response", "");
      route.repeat = r.value("repeat", std::size_t{1});
      route.delay_seconds = r.value("delay_seconds", 0.0);
      routes.push_back(std::move(route));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad stub route: ") + e.what());
    }
  }
  return routes;
}

struct StubToolServer::Impl {
  std::vector<StubRoute> routes;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mutex;
  std::vector<std::string> log;

  void handle(const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mutex);
      log.push_back(req.method + " " + req.target);
    }
    for (const auto& route : routes) {
      if (route.method != req.method || route.target != req.target) continue;
      if (route.request_body && *route.request_body != req.body) continue;
      if (route.delay_seconds > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(route.delay_seconds));
      }
      std::string body;
      body.reserve(route.response.size() * route.repeat);
      for (std::size_t i = 0; i < route.repeat; ++i) body += route.response;
      res.status = route.status;
      res.set_content(body, "text/plain; charset=utf-8");
      return;
    }
    res.status = 404;
    res.set_content("no stub route for " + req.method + " " + req.target, "text/plain");
  }
};

StubToolServer::StubToolServer(std::vector<StubRoute> routes) : impl_(std::make_unique<Impl>()) {
  impl_->routes = std::move(routes);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    impl_->handle(req, res);
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
}

StubToolServer::~StubToolServer() { stop(); }

int StubToolServer::start(int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    impl_->port = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (impl_->port <= 0) throw Error(ErrorCode::config, "stub server could not bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void StubToolServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

int StubToolServer::port() const { return impl_->port; }

std::string StubToolServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::vector<std::string> StubToolServer::requests() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->log;
}

}  // namespace rebel
