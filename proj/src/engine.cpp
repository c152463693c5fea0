#include "rebel/engine.hpp"

#include <chrono>

#include "rebel/text.hpp"

namespace rebel {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_parse_failure(ErrorCode code) {
  return code == ErrorCode::parse || code == ErrorCode::unknown_tool ||
         code == ErrorCode::unknown_param;
}

}  // namespace

Engine::Engine(EngineConfig config, std::vector<ToolSpec> registry, CompletionBackend& backend,
               const Featurizer& featurizer, ToolExecutor& executor, PromptSet prompts)
    : config_(std::move(config)),
      registry_(std::move(registry)),
      backend_(backend),
      featurizer_(featurizer),
      executor_(executor),
      prompts_(std::move(prompts)) {
  config_.validate();
  validate_registry(registry_);
}

AnswerResult Engine::answer(std::string_view question_text) const {
  const Question question = Question::make(std::string(question_text));
  RunContext run(*this);
  const auto started = Clock::now();
  AnswerResult result;
  try {
    auto [answer, fact] = run.promptf(question, true, result.trace);
    result.answer = std::move(answer);
    result.fact = std::move(fact);
  } catch (const RunError&) {
    throw;
  } catch (const Error& e) {
    RunMetrics metrics = run.metrics();
    metrics.wall_seconds = seconds_since(started);
    throw RunError(e.code(), e.what(), run.path_string(), std::move(result.trace), metrics);
  }
  result.metrics = run.metrics();
  result.metrics.wall_seconds = seconds_since(started);
  result.memory = run.memory();
  return result;
}

RunContext::RunContext(const Engine& engine)
    : engine_(engine), budget_(engine.backend(), engine.config().completion_budget) {}

RunMetrics RunContext::metrics() const {
  RunMetrics m;
  m.completion_calls = budget_.calls();
  m.tool_calls = tool_calls_;
  return m;
}

std::string RunContext::path_string() const {
  std::string out = "root";
  for (std::size_t i : path_) out += "/" + std::to_string(i);
  return out;
}

std::string RunContext::complete(Purpose purpose, const std::string& prompt) {
  const EngineConfig& cfg = engine_.config();
  CompletionRequest request;
  request.prompt = prompt;
  request.max_tokens = cfg.max_tokens;
  request.temperature = cfg.temperature;
  request.purpose = purpose;
  if (purpose == Purpose::split) request.stop_sequences = {"\n\n"};
  return budget_.complete(request);
}

// Re-asks the same prompt when the reply cannot be parsed, up to
// max_parse_retries extra times. Each re-ask is its own transcript entry.
template <typename Parse>
auto RunContext::ask_parsed(Purpose purpose, const std::string& prompt, TraceNode& node,
                            Parse parse) {
  for (std::size_t attempt = 0;; ++attempt) {
    const std::string completion = complete(purpose, prompt);
    try {
      return parse(completion);
    } catch (const Error& e) {
      if (!is_parse_failure(e.code()) || attempt >= engine_.config().max_parse_retries) throw;
      node.notes.push_back("retry " + std::string(to_string(purpose)) + ": " + e.what());
    }
  }
}

const FeatureVector& RunContext::features(const std::string& text) {
  auto it = feature_cache_.find(text);
  if (it == feature_cache_.end()) {
    it = feature_cache_.emplace(text, engine_.featurizer().featurize(text)).first;
  }
  return it->second;
}

std::pair<std::string, Fact> RunContext::promptf(const Question& question, bool allowsplit,
                                                 TraceNode& node) {
  const EngineConfig& cfg = engine_.config();
  if (question.depth > cfg.max_depth) {
    throw Error(ErrorCode::precondition, "question depth exceeds max_depth");
  }
  const auto started = Clock::now();
  node.question = question.text;
  node.depth = question.depth;
  node.memory_at_entry = memory_.size();
  ancestors_.push_back(question.text);

  if (allowsplit && cfg.enable_split && question.depth < cfg.max_depth) {
    split_and_recurse(question, allowsplit, node);
  }

  node.memory_at_check = memory_.size();
  std::string answer;
  if (engine_.registry().empty()) {
    // Without tools both branches end in plain synthesis; skip the check.
    node.path = NodePath::memory;
    answer = synthesize(question, std::nullopt, node);
  } else if (memory_check(question, node)) {
    node.path = NodePath::memory;
    answer = synthesize(question, std::nullopt, node);
  } else {
    node.path = NodePath::tool;
    answer = answer_with_tool(question, node);
  }

  node.answer = answer;
  node.wall_seconds = seconds_since(started);
  ancestors_.pop_back();
  return {answer, Fact{question.text, answer}};
}

void RunContext::split_and_recurse(const Question& question, bool allowsplit, TraceNode& node) {
  const EngineConfig& cfg = engine_.config();
  const std::string prompt =
      engine_.registry().empty()
          ? render_tool_free_split_prompt(question, memory_, cfg.split_shots, engine_.prompts())
          : render_split_prompt(engine_.registry(), question, memory_, cfg.split_shots,
                                engine_.prompts());
  node.split_called = true;
  node.subquestions = parse_subquestions(complete(Purpose::split, prompt));

  // Near-duplicates of the question being split would recurse forever.
  std::vector<std::string> survivors;
  for (const auto& sub : node.subquestions) {
    const FeatureVector& sub_features = features(sub);
    bool duplicate = false;
    if (cfg.guard_ancestors) {
      for (const auto& ancestor : ancestors_) {
        duplicate = duplicate ||
                    cosine_similarity(features(ancestor), sub_features) > cfg.similarity_threshold;
      }
    } else {
      duplicate = cosine_similarity(features(question.text), sub_features) >
                  cfg.similarity_threshold;
    }
    if (duplicate) {
      node.pruned.push_back(sub);
      allowsplit = false;
    } else {
      survivors.push_back(sub);
    }
  }
  node.allowsplit_for_children = allowsplit;

  node.children.reserve(survivors.size());
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    TraceNode& child = node.children.emplace_back();
    path_.push_back(i);
    auto [child_answer, fact] =
        promptf(Question{survivors[i], question.depth + 1}, allowsplit, child);
    path_.pop_back();
    memory_.append(std::move(fact));
  }
}

bool RunContext::memory_check(const Question& question, TraceNode& node) {
  const std::string prompt =
      render_memory_check_prompt(memory_, question, engine_.prompts());
  try {
    return ask_parsed(Purpose::memory_check, prompt, node,
                      [](const std::string& c) { return parse_yes_no(c); });
  } catch (const Error& e) {
    if (!is_parse_failure(e.code())) throw;
    node.notes.push_back("memory check unparseable, treated as no");
    return false;
  }
}

std::string RunContext::answer_with_tool(const Question& question, TraceNode& node) {
  const EngineConfig& cfg = engine_.config();
  const auto& registry = engine_.registry();
  const ToolSpec* tool = nullptr;
  ToolInput input;
  try {
    const int id = ask_parsed(Purpose::tool_pick,
                              render_tool_pick_prompt(registry, question, memory_,
                                                      engine_.prompts()),
                              node, [&](const std::string& c) { return parse_tool_id(c, registry); });
    node.tool_id = id;
    tool = find_tool(registry, id);
    input = ask_parsed(Purpose::tool_input,
                       render_tool_input_prompt(*tool, question, memory_, cfg.tool_input_shots,
                                                engine_.prompts()),
                       node,
                       [&](const std::string& c) { return parse_tool_input_json(c, *tool); });
  } catch (const Error& e) {
    if (!is_parse_failure(e.code())) throw;
    node.fallback = std::string(to_string(e.code())) + ": " + e.what();
    return synthesize(question, std::nullopt, node);
  }
  return use_tool(*tool, input, question, node);
}

std::string RunContext::use_tool(const ToolSpec& tool, const ToolInput& input,
                                 const Question& question, TraceNode& node) {
  const EngineConfig& cfg = engine_.config();
  const ToolRequest request = build_request(tool, input);
  std::optional<std::string> evidence;
  ++tool_calls_;
  try {
    evidence = truncate(engine_.executor().execute(request, cfg.tool_timeout_seconds),
                        cfg.truncation_limit);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::transport && e.code() != ErrorCode::timeout) throw;
    node.fallback = std::string(to_string(e.code())) + ": " + e.what();
  }
  return synthesize(question, evidence, node);
}

std::string RunContext::synthesize(const Question& question,
                                   const std::optional<std::string>& evidence, TraceNode& node) {
  const std::string prompt =
      render_answer_synthesis_prompt(question, memory_, evidence, engine_.prompts());
  try {
    return ask_parsed(Purpose::answer_synthesis, prompt, node, [](const std::string& c) {
      const auto trimmed = text::trim(c);
      if (trimmed.empty()) throw Error(ErrorCode::parse, "empty answer");
      return std::string(trimmed);
    });
  } catch (const Error& e) {
    if (!is_parse_failure(e.code())) throw;
    node.notes.push_back("answer synthesis returned nothing");
    return "unknown";
  }
}

}  // namespace rebel
