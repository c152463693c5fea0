#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rebel/backend.hpp"
#include "rebel/core.hpp"
#include "rebel/featurizer.hpp"
#include "rebel/prompting.hpp"
#include "rebel/tools.hpp"

namespace rebel {

/// Raised when a run cannot finish. Carries the underlying error code,
/// the slash-separated path of the failing node ("root/1/0") and the
/// trace built up to that point.
class RunError : public Error {
 public:
  RunError(ErrorCode cause, const std::string& message, std::string trace_path,
           TraceNode partial_trace, RunMetrics metrics)
      : Error(cause, message + " (at " + trace_path + ")"),
        trace_path_(std::move(trace_path)),
        partial_trace_(std::move(partial_trace)),
        metrics_(metrics) {}

  const std::string& trace_path() const noexcept { return trace_path_; }
  const TraceNode& partial_trace() const noexcept { return partial_trace_; }
  const RunMetrics& metrics() const noexcept { return metrics_; }

 private:
  std::string trace_path_;
  TraceNode partial_trace_;
  RunMetrics metrics_;
};

/// Answers questions by recursive decomposition. Immutable after
/// construction; `answer` may be called from several threads at once as
/// long as the backend and tool executor tolerate it.
class Engine {
 public:
  Engine(EngineConfig config, std::vector<ToolSpec> registry, CompletionBackend& backend,
         const Featurizer& featurizer, ToolExecutor& executor,
         PromptSet prompts = PromptSet::defaults());

  AnswerResult answer(std::string_view question_text) const;

  const EngineConfig& config() const noexcept { return config_; }
  const std::vector<ToolSpec>& registry() const noexcept { return registry_; }
  const PromptSet& prompts() const noexcept { return prompts_; }
  CompletionBackend& backend() const noexcept { return backend_; }
  const Featurizer& featurizer() const noexcept { return featurizer_; }
  ToolExecutor& executor() const noexcept { return executor_; }

 private:
  EngineConfig config_;
  std::vector<ToolSpec> registry_;
  CompletionBackend& backend_;
  const Featurizer& featurizer_;
  ToolExecutor& executor_;
  PromptSet prompts_;
};

/// State of one top-level question: the shared memory, the completion
/// budget, counters and the path to the node being worked on. Never
/// shared between runs.
class RunContext {
 public:
  explicit RunContext(const Engine& engine);

  /// Answers `question`, splitting first when allowed. Appends the facts
  /// of answered subquestions to the run memory and returns this node's
  /// answer together with its own fact (which the caller appends).
  std::pair<std::string, Fact> promptf(const Question& question, bool allowsplit,
                                       TraceNode& node);

  /// Asks whether the question is answerable without tools. An
  /// unparseable reply, after retries, counts as "no".
  bool memory_check(const Question& question, TraceNode& node);

  /// Calls the tool and synthesises an answer from its (truncated)
  /// output. Tool transport failures fall back to memory-only synthesis.
  std::string use_tool(const ToolSpec& tool, const ToolInput& input, const Question& question,
                       TraceNode& node);

  const Memory& memory() const noexcept { return memory_; }
  RunMetrics metrics() const;
  std::string path_string() const;

 private:
  std::string complete(Purpose purpose, const std::string& prompt);
  std::string synthesize(const Question& question, const std::optional<std::string>& evidence,
                         TraceNode& node);
  std::string answer_with_tool(const Question& question, TraceNode& node);
  void split_and_recurse(const Question& question, bool allowsplit, TraceNode& node);
  const FeatureVector& features(const std::string& text);

  template <typename Parse>
  auto ask_parsed(Purpose purpose, const std::string& prompt, TraceNode& node, Parse parse);

  const Engine& engine_;
  BudgetedBackend budget_;
  Memory memory_;
  std::size_t tool_calls_ = 0;
  std::vector<std::size_t> path_;
  std::vector<std::string> ancestors_;
  std::unordered_map<std::string, FeatureVector> feature_cache_;
};

}  // namespace rebel
