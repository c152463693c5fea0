#include <gtest/gtest.h>

#include <sstream>

#include "rebel/config.hpp"

using namespace rebel;

namespace {

EngineConfig engine(const std::string& doc) {
  std::istringstream in(doc);
  return load_engine_config(in, "/base");
}

BackendConfig backend(const std::string& doc) {
  std::istringstream in(doc);
  return load_backend_config(in, "/base");
}

}  // namespace

TEST(EngineConfigFile, OverridesAndDefaults) {
  const auto c = engine(R"({"max_depth": 2, "enable_split": false, "prompt_dir": "prompts"})");
  EXPECT_EQ(c.max_depth, 2);
  EXPECT_FALSE(c.enable_split);
  EXPECT_EQ(c.prompt_dir, "/base/prompts");
  EXPECT_DOUBLE_EQ(c.similarity_threshold, 0.98);
}

TEST(EngineConfigFile, Rejections) {
  EXPECT_THROW(engine(R"({"max_dpeth": 2})"), Error);
  EXPECT_THROW(engine(R"({"max_depth": "deep"})"), Error);
  EXPECT_THROW(engine(R"({"similarity_threshold": 1.5})"), Error);
  EXPECT_THROW(engine(R"({"featurizer": {"type": "remote"}})"), Error);
  EXPECT_THROW(engine("[1]"), FormatError);
}

TEST(BackendConfigFile, HttpAndScripted) {
  auto b = backend(R"({"endpoint": "https://api.example/v1/completions", "model": "m",
                       "response_pointer": "/text"})");
  EXPECT_EQ(b.kind, BackendKind::http);
  EXPECT_EQ(b.http.model, "m");
  EXPECT_EQ(b.http.response_pointer, "/text");
  b = backend(R"({"type": "scripted", "script": "s.json"})");
  EXPECT_EQ(b.kind, BackendKind::scripted);
  EXPECT_EQ(b.script, "/base/s.json");
  EXPECT_THROW(backend(R"({"type": "scripted"})"), Error);
  EXPECT_THROW(backend(R"({"type": "grpc"})"), Error);
  EXPECT_THROW(backend(R"({"endpoint": "https://x", "mdoel": "m"})"), Error);
}

TEST(ScriptBookFile, LookupWithFallbacks) {
  std::istringstream runs(R"({"runs": {"full/a": ["1"], "a": ["2"]}})");
  const auto book = ScriptBook::load(runs);
  EXPECT_EQ(book.find("full/a", {"a"}), (std::vector<std::string>{"1"}));
  EXPECT_EQ(book.find("gpt3/a", {"a"}), (std::vector<std::string>{"2"}));
  EXPECT_FALSE(book.find("b").has_value());
  std::istringstream flat(R"(["x", "y"])");
  EXPECT_EQ(ScriptBook::load(flat).find("default")->size(), 2u);
}
