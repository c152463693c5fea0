#include <chrono>
#include <cstdlib>
#include <thread>

#include "json.hpp"
#include "rebel/backend.hpp"
#include "rebel/http.hpp"
#include "rebel/text.hpp"

namespace rebel {
namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpCompletionBackend::HttpCompletionBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  http::parse_url(config_.endpoint);  // validates
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr) {
      throw Error(ErrorCode::config,
                  "environment variable " + config_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
  if (config_.max_retries < 0) throw Error(ErrorCode::config, "max_retries must be >= 0");
}

std::string HttpCompletionBackend::request_body(const CompletionRequest& request) const {
  nlohmann::ordered_json body;
  if (!config_.model_field.empty() && !config_.model.empty()) {
    body[config_.model_field] = config_.model;
  }
  body[config_.prompt_field] = request.prompt;
  if (!config_.max_tokens_field.empty()) body[config_.max_tokens_field] = request.max_tokens;
  if (!config_.temperature_field.empty()) body[config_.temperature_field] = request.temperature;
  if (!config_.stop_field.empty() && !request.stop_sequences.empty()) {
    body[config_.stop_field] = request.stop_sequences;
  }
  return body.dump();
}

std::string HttpCompletionBackend::complete(const CompletionRequest& request) {
  request.validate();
  http::Request http_request;
  http_request.method = HttpMethod::post;
  http_request.url = config_.endpoint;
  http_request.body = request_body(request);
  http_request.content_type = "application/json";
  if (!api_key_.empty()) {
    std::string value = config_.auth_scheme.empty() ? api_key_
                                                    : config_.auth_scheme + " " + api_key_;
    http_request.headers.emplace_back(config_.auth_header, std::move(value));
  }

  auto backoff = std::chrono::milliseconds(config_.backoff_ms);
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= config_.max_retries;
    try {
      const http::Response response = http::send(http_request, config_.timeout_seconds);
      if (response.status >= 200 && response.status < 300) {
        nlohmann::json parsed;
        try {
          parsed = nlohmann::json::parse(response.body);
          const auto& text = parsed.at(nlohmann::json::json_pointer(config_.response_pointer));
          return text.get<std::string>();
        } catch (const nlohmann::json::exception& e) {
          throw TransportError(std::string("unexpected completion response: ") + e.what(),
                               response.status, response.body.substr(0, 200));
        }
      }
      if (last || !retryable(response.status)) {
        throw TransportError("completion endpoint returned HTTP " +
                                 std::to_string(response.status),
                             response.status, response.body.substr(0, 200));
      }
    } catch (const TransportError& e) {
      if (last || (e.status() && !retryable(*e.status()))) throw;
    } catch (const Error& e) {
      if (last || e.code() != ErrorCode::timeout) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace rebel
