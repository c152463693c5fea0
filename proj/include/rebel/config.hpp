#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rebel/backend.hpp"
#include "rebel/core.hpp"

namespace rebel {

/// Engine settings from a JSON object; absent keys keep their defaults,
/// unknown keys are rejected. Relative `prompt_dir` paths resolve against
/// `base_dir`. Throws FormatError or Error(ErrorCode::config).
EngineConfig load_engine_config(std::istream& in,
                                const std::filesystem::path& base_dir = {});

enum class BackendKind { http, scripted };

struct BackendConfig {
  BackendKind kind = BackendKind::http;
  HttpBackendConfig http;
  std::filesystem::path script;  // scripted only
};

/// {"type": "http", "endpoint": ..., ...} or {"type": "scripted",
/// "script": path}. Relative script paths resolve against `base_dir`.
BackendConfig load_backend_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Hand-authored completions for scripted runs, keyed by run. A bare JSON
/// array is a single run stored under the key "default"; otherwise
/// {"runs": {key: [completion, ...]}}.
class ScriptBook {
 public:
  static ScriptBook load(std::istream& in);

  /// Looks up `key`, then each fallback in order.
  std::optional<std::vector<std::string>> find(const std::string& key,
                                               const std::vector<std::string>& fallbacks = {}) const;

 private:
  std::map<std::string, std::vector<std::string>> runs_;
};

}  // namespace rebel
