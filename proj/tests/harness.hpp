// Scripted-run fixtures and adversarial backends shared by the engine
// tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rebel/backend.hpp"
#include "rebel/engine.hpp"
#include "support.hpp"

namespace rebel::testing {

struct ExpectedRun {
  std::string answer;
  std::string shape;
  std::vector<Fact> memory;
  std::size_t completion_calls = 0;
  std::size_t tool_calls = 0;
  std::vector<std::string> tool_urls;
};

struct ScriptedRun {
  std::string name;
  std::string question;
  std::vector<std::string> completions;
  std::map<std::string, std::string> tool_responses;
  ExpectedRun expected;
};

inline std::vector<ScriptedRun> load_scripted_runs() {
  std::vector<ScriptedRun> runs;
  for (const auto& r : nlohmann::json::parse(read_file(fixture("runs.json")))) {
    ScriptedRun run;
    run.name = r.at("name").get<std::string>();
    run.question = r.at("question").get<std::string>();
    run.completions = r.at("completions").get<std::vector<std::string>>();
    run.tool_responses = r.at("tool_responses").get<std::map<std::string, std::string>>();
    const auto& e = r.at("expected");
    run.expected.answer = e.at("answer").get<std::string>();
    run.expected.shape = e.at("shape").get<std::string>();
    for (const auto& f : e.at("memory")) {
      run.expected.memory.push_back({f.at(0).get<std::string>(), f.at(1).get<std::string>()});
    }
    run.expected.completion_calls = e.at("completion_calls").get<std::size_t>();
    run.expected.tool_calls = e.at("tool_calls").get<std::size_t>();
    run.expected.tool_urls = e.at("tool_urls").get<std::vector<std::string>>();
    runs.push_back(std::move(run));
  }
  return runs;
}

struct RunOutcome {
  AnswerResult result;
  std::vector<std::string> tool_urls;
  std::size_t unused_completions = 0;
};

inline RunOutcome execute_scripted_run(const ScriptedRun& run) {
  const auto registry = load_registry_file(fixture("runs_tools.json"));
  ScriptedBackend backend(run.completions);
  FakeToolExecutor executor(run.tool_responses);
  TrigramFeaturizer featurizer;
  const Engine engine(EngineConfig{}, registry, backend, featurizer, executor);
  RunOutcome out{engine.answer(run.question), executor.urls(), backend.remaining()};
  return out;
}

/// Lists every way `outcome` departs from the hand-traced expectation.
inline std::vector<std::string> compare_run(const ScriptedRun& run, const RunOutcome& outcome) {
  std::vector<std::string> problems;
  const auto& r = outcome.result;
  const auto& e = run.expected;
  if (r.answer != e.answer) problems.push_back("answer '" + r.answer + "' != '" + e.answer + "'");
  if (trace_shape(r.trace) != e.shape) {
    problems.push_back("shape " + trace_shape(r.trace) + " != " + e.shape);
  }
  if (r.memory.facts() != e.memory) problems.push_back("memory differs");
  if (r.metrics.completion_calls != e.completion_calls) {
    problems.push_back("completion calls " + std::to_string(r.metrics.completion_calls) +
                       " != " + std::to_string(e.completion_calls));
  }
  if (r.metrics.tool_calls != e.tool_calls) problems.push_back("tool call count differs");
  if (outcome.tool_urls != e.tool_urls) problems.push_back("tool URLs differ");
  if (outcome.unused_completions != 0) problems.push_back("script not fully consumed");
  return problems;
}

/// A model that never stops decomposing: every split yields two
/// subquestions nobody has seen before, and every other step answers
/// something plausible at random.
class AdversarialBackend final : public CompletionBackend {
 public:
  AdversarialBackend(std::uint64_t seed, int tool_count) : rng_(seed), tool_count_(tool_count) {}

  std::string complete(const CompletionRequest& request) override {
    std::lock_guard lock(mutex_);
    ++calls_;
    switch (request.purpose) {
      case Purpose::split:
        return fresh() + ", " + fresh();
      case Purpose::memory_check:
        return coin() ? "yes" : "no";
      case Purpose::tool_pick:
        return std::to_string(1 + static_cast<int>(rng_() % static_cast<unsigned>(tool_count_)));
      case Purpose::tool_input:
        return coin() ? "{\"q\": \"" + fresh() + "\"}" : "not json";
      case Purpose::answer_synthesis:
        return "answer " + std::to_string(rng_() % 1000);
    }
    return "";
  }

  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }

 private:
  bool coin() { return (rng_() & 1) != 0; }
  std::string fresh() {
    static const char* kWords[] = {"capital", "river", "author", "mountain", "currency",
                                   "founder", "language", "planet", "inventor", "border"};
    std::string s = "What is the";
    for (int i = 0; i < 3; ++i) s += std::string(" ") + kWords[rng_() % 10];
    return s + " of thing " + std::to_string(counter_++) + "?";
  }

  std::mt19937_64 rng_;
  int tool_count_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
  std::size_t counter_ = 0;
};

/// Tool executor that fails about half the time.
class FlakyToolExecutor final : public ToolExecutor {
 public:
  explicit FlakyToolExecutor(std::uint64_t seed) : rng_(seed) {}
  std::string execute(const ToolRequest&, double) override {
    std::lock_guard lock(mutex_);
    if (rng_() & 1) throw TransportError("unreachable", 502, "");
    return "evidence " + std::to_string(rng_() % 100);
  }

 private:
  std::mt19937_64 rng_;
  std::mutex mutex_;
};

/// Two tools, both taking a single "q" parameter.
inline std::vector<ToolSpec> two_query_tools() {
  std::vector<ToolSpec> r(2);
  for (int i = 0; i < 2; ++i) {
    r[i].id = i + 1;
    r[i].name = "t" + std::to_string(i + 1);
    r[i].description = "Tool number " + std::to_string(i + 1) + ".";
    r[i].endpoint = "https://t.example/" + r[i].name;
    r[i].dynamic_params = {{"q", "query"}};
  }
  return r;
}

inline std::size_t max_depth_of(const TraceNode& node) {
  std::size_t d = static_cast<std::size_t>(node.depth);
  for (const auto& c : node.children) d = std::max(d, max_depth_of(c));
  return d;
}

}  // namespace rebel::testing
