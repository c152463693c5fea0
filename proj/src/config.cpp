#include "rebel/config.hpp"

#include <istream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace rebel {
namespace {

using json = nlohmann::json;

json parse_document(std::istream& in, const char* what) {
  const std::string doc{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    json root = json::parse(doc);
    if (!root.is_object()) throw FormatError(std::string(what) + " must be a JSON object");
    return root;
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid ") + what + ": " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::config, std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, std::string("key '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

EngineConfig load_engine_config(std::istream& in, const std::filesystem::path& base_dir) {
  const json root = parse_document(in, "engine config");
  reject_unknown(root,
                 {"similarity_threshold", "max_depth", "truncation_limit", "split_shots",
                  "tool_input_shots", "max_parse_retries", "completion_budget", "max_tokens",
                  "temperature", "enable_split", "guard_ancestors", "tool_timeout_seconds",
                  "prompt_dir", "featurizer"},
                 "engine config");
  EngineConfig cfg;
  read(root, "similarity_threshold", cfg.similarity_threshold);
  read(root, "max_depth", cfg.max_depth);
  read(root, "truncation_limit", cfg.truncation_limit);
  read(root, "split_shots", cfg.split_shots);
  read(root, "tool_input_shots", cfg.tool_input_shots);
  read(root, "max_parse_retries", cfg.max_parse_retries);
  read(root, "completion_budget", cfg.completion_budget);
  read(root, "max_tokens", cfg.max_tokens);
  read(root, "temperature", cfg.temperature);
  read(root, "enable_split", cfg.enable_split);
  read(root, "guard_ancestors", cfg.guard_ancestors);
  read(root, "tool_timeout_seconds", cfg.tool_timeout_seconds);
  if (root.contains("prompt_dir") && !root["prompt_dir"].is_null()) {
    std::string dir;
    read(root, "prompt_dir", dir);
    cfg.prompt_dir = resolve(dir, base_dir).string();
  }
  if (const auto f = root.find("featurizer"); f != root.end()) {
    if (!f->is_object()) throw Error(ErrorCode::config, "featurizer must be an object");
    reject_unknown(*f,
                   {"type", "endpoint", "api_key_env", "model", "input_field", "model_field",
                    "response_pointer", "timeout_seconds"},
                   "featurizer");
    std::string type = "trigram";
    read(*f, "type", type);
    if (type == "trigram") {
      cfg.featurizer = FeaturizerKind::trigram;
    } else if (type == "remote") {
      cfg.featurizer = FeaturizerKind::remote;
    } else {
      throw Error(ErrorCode::config, "featurizer type must be trigram or remote");
    }
    auto& r = cfg.remote_embedding;
    read(*f, "endpoint", r.endpoint);
    read(*f, "api_key_env", r.api_key_env);
    read(*f, "model", r.model);
    read(*f, "input_field", r.input_field);
    read(*f, "model_field", r.model_field);
    read(*f, "response_pointer", r.response_pointer);
    read(*f, "timeout_seconds", r.timeout_seconds);
  }
  cfg.validate();
  return cfg;
}

BackendConfig load_backend_config(std::istream& in, const std::filesystem::path& base_dir) {
  const json root = parse_document(in, "backend config");
  BackendConfig cfg;
  std::string type = "http";
  read(root, "type", type);
  if (type == "scripted") {
    reject_unknown(root, {"type", "script"}, "backend config");
    std::string script;
    read(root, "script", script);
    if (script.empty()) throw Error(ErrorCode::config, "scripted backend needs a 'script' path");
    cfg.kind = BackendKind::scripted;
    cfg.script = resolve(script, base_dir);
    return cfg;
  }
  if (type != "http") throw Error(ErrorCode::config, "backend type must be http or scripted");
  reject_unknown(root,
                 {"type", "endpoint", "api_key_env", "auth_header", "auth_scheme", "model",
                  "model_field", "prompt_field", "max_tokens_field", "temperature_field",
                  "stop_field", "response_pointer", "timeout_seconds", "max_retries",
                  "backoff_ms"},
                 "backend config");
  cfg.kind = BackendKind::http;
  auto& h = cfg.http;
  read(root, "endpoint", h.endpoint);
  read(root, "api_key_env", h.api_key_env);
  read(root, "auth_header", h.auth_header);
  read(root, "auth_scheme", h.auth_scheme);
  read(root, "model", h.model);
  read(root, "model_field", h.model_field);
  read(root, "prompt_field", h.prompt_field);
  read(root, "max_tokens_field", h.max_tokens_field);
  read(root, "temperature_field", h.temperature_field);
  read(root, "stop_field", h.stop_field);
  read(root, "response_pointer", h.response_pointer);
  read(root, "timeout_seconds", h.timeout_seconds);
  read(root, "max_retries", h.max_retries);
  read(root, "backoff_ms", h.backoff_ms);
  if (h.endpoint.empty()) throw Error(ErrorCode::config, "http backend needs an endpoint");
  if (h.prompt_field.empty()) throw Error(ErrorCode::config, "prompt_field must be non-empty");
  return cfg;
}

ScriptBook ScriptBook::load(std::istream& in) {
  const std::string doc{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  ScriptBook book;
  try {
    const json root = json::parse(doc);
    if (root.is_array()) {
      book.runs_["default"] = root.get<std::vector<std::string>>();
    } else if (root.is_object() && root.contains("runs") && root["runs"].is_object()) {
      for (const auto& [key, value] : root["runs"].items()) {
        book.runs_[key] = value.get<std::vector<std::string>>();
      }
    } else {
      throw FormatError("script must be an array or {\"runs\": {...}}");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid script: ") + e.what());
  }
  return book;
}

std::optional<std::vector<std::string>> ScriptBook::find(
    const std::string& key, const std::vector<std::string>& fallbacks) const {
  if (auto it = runs_.find(key); it != runs_.end()) return it->second;
  for (const auto& k : fallbacks) {
    if (auto it = runs_.find(k); it != runs_.end()) return it->second;
  }
  return std::nullopt;
}

}  // namespace rebel
