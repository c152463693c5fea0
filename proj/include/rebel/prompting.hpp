#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rebel/core.hpp"

namespace rebel {

struct SplitShot {
  std::string question;
  std::string subquestions;  // comma-separated, as the model should answer
};

struct ToolInputShot {
  int tool_id = 0;
  std::string description;
  ParamList params;  // name -> description
  std::string question;
  std::string input_json;
};

/// Templates and shot banks for every prompt family. Templates use
/// `{name}` placeholders (lowercase letters and underscores); any other
/// brace is literal text.
struct PromptSet {
  std::string split;                    // tool_list, shots, memory, question
  std::string split_shot;               // question, subquestions
  std::string memory_check;             // memory, question
  std::string tool_pick;                // tool_list, memory, question
  std::string tool_block;               // tool_id, description, params
  std::string tool_input;               // shots, tool_block, memory, question, tool_id
  std::string tool_input_shot;          // tool_block, question, tool_id, input
  std::string answer_synthesis;         // memory, question
  std::string answer_synthesis_evidence;  // memory, evidence, question
  std::vector<SplitShot> split_shots;
  std::vector<ToolInputShot> tool_input_shots;

  static const PromptSet& defaults();

  /// Starts from the defaults and replaces whatever files exist in `dir`
  /// (`split.txt`, ..., `split_shots.json`, `tool_input_shots.json`).
  /// One trailing newline is stripped from each template file.
  static PromptSet load(const std::filesystem::path& dir);
};

using Bindings = std::vector<std::pair<std::string_view, std::string>>;

/// Single-pass substitution; substituted text is never rescanned. Throws
/// ErrorCode::template_error on a placeholder with no binding.
std::string render_template(std::string_view tmpl, const Bindings& bindings);

/// One "Q: <question> A: <answer>" line per fact, or "None".
std::string render_memory(const Memory& memory);

/// "tool <id>: <description>" entries separated by blank lines.
std::string render_tool_list(std::span<const ToolSpec> tools);

/// `{"name": description, ...}`, or `{}` when there are no parameters.
std::string render_params(const ParamList& params);

std::string render_split_prompt(std::span<const ToolSpec> tools, const Question& question,
                                const Memory& memory, std::size_t shot_count,
                                const PromptSet& prompts = PromptSet::defaults());

/// Split prompt for a run with no registered tools; the tool list reads
/// "None".
std::string render_tool_free_split_prompt(const Question& question, const Memory& memory,
                                          std::size_t shot_count,
                                          const PromptSet& prompts = PromptSet::defaults());

std::string render_memory_check_prompt(const Memory& memory, const Question& question,
                                       const PromptSet& prompts = PromptSet::defaults());

std::string render_tool_pick_prompt(std::span<const ToolSpec> tools, const Question& question,
                                    const Memory& memory,
                                    const PromptSet& prompts = PromptSet::defaults());

std::string render_tool_input_prompt(const ToolSpec& tool, const Question& question,
                                     const Memory& memory, std::size_t shot_count,
                                     const PromptSet& prompts = PromptSet::defaults());

std::string render_answer_synthesis_prompt(const Question& question, const Memory& memory,
                                           const std::optional<std::string>& evidence,
                                           const PromptSet& prompts = PromptSet::defaults());

// Completion parsers ---------------------------------------------------------

/// Splits on commas outside quotes, trims, drops empty pieces.
std::vector<std::string> parse_subquestions(std::string_view completion);

/// Reads the first alphabetic token: "yes" or "no". Anything else throws
/// ErrorCode::parse.
bool parse_yes_no(std::string_view completion);

/// First integer literal in the completion. Throws ErrorCode::parse when
/// there is none, ErrorCode::unknown_tool when it is not a registry id.
int parse_tool_id(std::string_view completion, std::span<const ToolSpec> registry);

/// Parses the first balanced `{...}` as a JSON object. Numbers and
/// booleans become their JSON text; nulls are treated as absent. Throws
/// ErrorCode::parse or ErrorCode::unknown_param.
ToolInput parse_tool_input_json(std::string_view completion, const ToolSpec& tool);

}  // namespace rebel
