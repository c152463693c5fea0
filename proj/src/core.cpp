#include "rebel/core.hpp"

#include <algorithm>
#include <set>

#include "rebel/text.hpp"

namespace rebel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::config: return "config";
    case ErrorCode::format: return "format";
    case ErrorCode::integrity: return "integrity";
    case ErrorCode::validation: return "validation";
    case ErrorCode::template_error: return "template";
    case ErrorCode::parse: return "parse";
    case ErrorCode::unknown_tool: return "unknown_tool";
    case ErrorCode::unknown_param: return "unknown_param";
    case ErrorCode::transport: return "transport";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::replay_mismatch: return "replay_mismatch";
    case ErrorCode::replay_exhausted: return "replay_exhausted";
    case ErrorCode::empty_text: return "empty_text";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::zero_vector: return "zero_vector";
  }
  return "unknown";
}

std::string_view to_string(NodePath path) {
  return path == NodePath::memory ? "memory" : "tool";
}

std::string_view to_string(HttpMethod method) {
  return method == HttpMethod::get ? "GET" : "POST";
}

Question Question::make(std::string text, int depth) {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::precondition, "question text is empty");
  }
  if (depth < 0) throw Error(ErrorCode::precondition, "negative question depth");
  return Question{std::move(text), depth};
}

Memory::Memory(std::vector<Fact> facts) {
  for (auto& f : facts) append(std::move(f));
}

void Memory::append(Fact fact) {
  if (fact.question.empty() || fact.answer.empty()) {
    throw Error(ErrorCode::precondition, "fact question and answer must be non-empty");
  }
  facts_.push_back(std::move(fact));
}

bool Memory::is_prefix_of(const Memory& later) const {
  if (facts_.size() > later.facts_.size()) return false;
  return std::equal(facts_.begin(), facts_.end(), later.facts_.begin());
}

bool ToolSpec::declares(std::string_view dynamic_param) const {
  return std::any_of(dynamic_params.begin(), dynamic_params.end(),
                     [&](const auto& p) { return p.first == dynamic_param; });
}

namespace {

bool is_absolute_http_url(std::string_view url) {
  for (std::string_view scheme : {"http://", "https://"}) {
    if (url.substr(0, scheme.size()) == scheme) {
      const auto rest = url.substr(scheme.size());
      const auto host_end = rest.find_first_of("/?#");
      return !rest.substr(0, host_end).empty();
    }
  }
  return false;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::validation, message);
}

}  // namespace

void validate_registry(std::span<const ToolSpec> registry) {
  std::set<int> ids;
  std::set<std::string> names;
  for (const auto& tool : registry) {
    const std::string label = "tool '" + tool.name + "'";
    require(tool.id >= 1, label + ": id must be positive");
    require(ids.insert(tool.id).second, label + ": duplicate id " + std::to_string(tool.id));
    require(!tool.name.empty(), "tool name must be non-empty");
    require(names.insert(tool.name).second, label + ": duplicate name");
    require(!text::trim(tool.description).empty(), label + ": empty description");
    require(is_absolute_http_url(tool.endpoint),
            label + ": endpoint must be an absolute http(s) URL");
    std::set<std::string> dynamic_keys;
    for (const auto& [k, v] : tool.dynamic_params) {
      require(!k.empty(), label + ": empty dynamic parameter name");
      require(dynamic_keys.insert(k).second, label + ": duplicate dynamic parameter " + k);
    }
    std::set<std::string> static_keys;
    for (const auto& [k, v] : tool.static_params) {
      require(!k.empty(), label + ": empty static parameter name");
      require(static_keys.insert(k).second, label + ": duplicate static parameter " + k);
      require(!dynamic_keys.contains(k),
              label + ": parameter '" + k + "' is both static and dynamic");
    }
  }
  // Prompts enumerate "tool 1", "tool 2", ...; ids must be exactly 1..k.
  if (!ids.empty()) {
    require(*ids.rbegin() == static_cast<int>(ids.size()), "tool ids must form 1..k with no gaps");
  }
}

const ToolSpec* find_tool(std::span<const ToolSpec> registry, int id) {
  for (const auto& tool : registry) {
    if (tool.id == id) return &tool;
  }
  return nullptr;
}

std::size_t TraceNode::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::string trace_shape(const TraceNode& node) {
  std::string out(to_string(node.path));
  if (node.tool_id) out += "#" + std::to_string(*node.tool_id);
  if (node.fallback) out += "!";
  if (!node.pruned.empty()) out += "~" + std::to_string(node.pruned.size());
  if (!node.children.empty()) {
    out += "(";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i) out += ",";
      out += trace_shape(node.children[i]);
    }
    out += ")";
  }
  return out;
}

void EngineConfig::validate() const {
  auto check = [](bool ok, const char* message) {
    if (!ok) throw Error(ErrorCode::config, message);
  };
  check(similarity_threshold > 0.0 && similarity_threshold <= 1.0,
        "similarity_threshold must be in (0, 1]");
  check(max_depth >= 1, "max_depth must be positive");
  check(truncation_limit >= 1, "truncation_limit must be positive");
  check(completion_budget >= 1, "completion_budget must be positive");
  check(max_tokens >= 1, "max_tokens must be positive");
  check(temperature >= 0.0, "temperature must be non-negative");
  check(tool_timeout_seconds > 0.0, "tool_timeout_seconds must be positive");
  if (featurizer == FeaturizerKind::remote) {
    check(!remote_embedding.endpoint.empty(), "remote featurizer requires an endpoint");
  }
}

}  // namespace rebel
