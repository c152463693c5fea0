// Shared helpers for unit and acceptance tests.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rebel/errors.hpp"
#include "rebel/tools.hpp"

namespace rebel::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(REBEL_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing test file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<ToolSpec> load_registry_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return load_registry(in);
}

/// Answers tool requests from a URL -> body table. Unknown URLs fail the
/// way an unreachable API would.
class FakeToolExecutor final : public ToolExecutor {
 public:
  explicit FakeToolExecutor(std::map<std::string, std::string> responses = {})
      : responses_(std::move(responses)) {}

  std::string execute(const ToolRequest& request, double) override {
    std::lock_guard lock(mutex_);
    urls_.push_back(request.url);
    const auto it = responses_.find(request.url);
    if (it == responses_.end()) throw TransportError("tool endpoint returned HTTP 503", 503, "");
    return it->second;
  }

  std::vector<std::string> urls() const {
    std::lock_guard lock(mutex_);
    return urls_;
  }

 private:
  std::map<std::string, std::string> responses_;
  mutable std::mutex mutex_;
  std::vector<std::string> urls_;
};

/// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_.c_str(), old_->c_str(), 1);
    } else {
      ::unsetenv(name_.c_str());
    }
  }

 private:
  std::string name_;
  std::optional<std::string> old_;
};

}  // namespace rebel::testing
