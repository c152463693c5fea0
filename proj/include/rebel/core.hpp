#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rebel/errors.hpp"

namespace rebel {

/// A question or subquestion being answered. Depth 0 is the user's
/// question; each split adds one.
struct Question {
  std::string text;
  int depth = 0;

  /// Throws ErrorCode::precondition when the text is blank.
  static Question make(std::string text, int depth = 0);
};

/// One piece of accumulated knowledge: a subquestion and the answer that
/// was produced for it.
struct Fact {
  std::string question;
  std::string answer;

  bool operator==(const Fact&) const = default;
};

/// Ordered, append-only list of facts for one engine run.
class Memory {
 public:
  Memory() = default;
  explicit Memory(std::vector<Fact> facts);

  /// Throws ErrorCode::precondition on an empty question or answer.
  void append(Fact fact);

  const std::vector<Fact>& facts() const noexcept { return facts_; }
  std::size_t size() const noexcept { return facts_.size(); }
  bool empty() const noexcept { return facts_.empty(); }

  /// True when this memory's facts are a prefix of `later`'s.
  bool is_prefix_of(const Memory& later) const;

 private:
  std::vector<Fact> facts_;
};

enum class HttpMethod { get, post };

enum class PostEncoding { json, form };

/// An ordered name -> value (or name -> description) list. Declaration
/// order is significant for both prompts and request construction.
using ParamList = std::vector<std::pair<std::string, std::string>>;

/// A registered tool. Only `description` and `dynamic_params` are ever
/// shown to the language model; the rest stays on this side.
struct ToolSpec {
  int id = 0;
  std::string name;
  std::string description;
  ParamList dynamic_params;  // name -> description
  HttpMethod method = HttpMethod::get;
  std::string endpoint;
  ParamList static_params;   // name -> fixed value
  ParamList headers;         // static request headers (hidden)
  PostEncoding post_encoding = PostEncoding::json;

  bool declares(std::string_view dynamic_param) const;
};

/// Rejects id gaps, duplicate ids or names, relative endpoints and
/// overlapping static/dynamic keys. Throws ErrorCode::validation.
void validate_registry(std::span<const ToolSpec> registry);

const ToolSpec* find_tool(std::span<const ToolSpec> registry, int id);

/// Dynamic parameter values for one tool call, keyed by parameter name.
struct ToolInput {
  std::map<std::string, std::string> values;
};

enum class NodePath { memory, tool };

/// One node of the decomposition tree built while answering.
struct TraceNode {
  std::string question;
  int depth = 0;
  bool split_called = false;
  std::vector<std::string> subquestions;  // as parsed from the split
  std::vector<std::string> pruned;        // removed by the similarity guard
  bool allowsplit_for_children = true;
  std::size_t memory_at_entry = 0;
  std::size_t memory_at_check = 0;
  NodePath path = NodePath::memory;
  std::optional<int> tool_id;
  std::optional<std::string> fallback;  // why the tool path was abandoned
  std::vector<std::string> notes;       // retries and other annotations
  std::string answer;
  double wall_seconds = 0.0;
  std::vector<TraceNode> children;

  std::size_t node_count() const;
};

/// Timing-free structural rendering of a trace, used to compare runs.
std::string trace_shape(const TraceNode& root);

struct RunMetrics {
  double wall_seconds = 0.0;
  std::size_t completion_calls = 0;
  std::size_t tool_calls = 0;
};

struct AnswerResult {
  std::string answer;
  Fact fact;
  TraceNode trace;
  RunMetrics metrics;
  Memory memory;  // final memory of the run
};

enum class FeaturizerKind { trigram, remote };

struct RemoteEmbeddingConfig {
  std::string endpoint;
  std::string api_key_env;
  std::string model;
  std::string input_field = "input";
  std::string model_field = "model";
  std::string response_pointer = "/data/0/embedding";
  int timeout_seconds = 30;
};

struct EngineConfig {
  double similarity_threshold = 0.98;
  int max_depth = 3;
  std::size_t truncation_limit = 15000;
  std::size_t split_shots = 4;
  std::size_t tool_input_shots = 2;
  std::size_t max_parse_retries = 1;
  std::size_t completion_budget = 64;
  int max_tokens = 256;
  double temperature = 0.0;
  bool enable_split = true;
  bool guard_ancestors = false;
  double tool_timeout_seconds = 30.0;
  std::optional<std::string> prompt_dir;
  FeaturizerKind featurizer = FeaturizerKind::trigram;
  RemoteEmbeddingConfig remote_embedding;

  /// Throws ErrorCode::config when a field is outside its domain.
  void validate() const;
};

std::string_view to_string(NodePath path);
std::string_view to_string(HttpMethod method);

}  // namespace rebel
