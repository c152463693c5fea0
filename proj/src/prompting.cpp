#include "rebel/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "rebel/text.hpp"

namespace rebel {
namespace {

constexpr std::string_view kSplitInstruction =
    "Look at the tools we have access to. Split Q into subquestions to answer Q that can each be "
    "solved with one use of one tool. Make as few subquestions as possible. Split each "
    "subquestion with a comma and have no extra information other than the subquestions.";

constexpr std::string_view kSearchDescription =
    "The tool returns the results of free-form queries similar to those used for wolfram alpha. "
    "This is useful for complicated math or live data retrieval.  Can be used to get the current "
    "date.";

PromptSet make_defaults() {
  PromptSet p;
  p.split = "Tools we have access to =\n\n{tool_list}\n\n{shots}Memory:\n{memory}\n\nQ={question}\n\n" +
            std::string(kSplitInstruction) + "\n";
  p.split_shot = "Q={question}\n\n" + std::string(kSplitInstruction) + "\n{subquestions}\n\n";

  const std::string check_line =
      "Is the answer to Q found in the memory or in your knowledge base already? Answer with a yes "
      "or no.";
  p.memory_check = "Q: \"What's the time?\"\n" + check_line + " no\n\n" +
                   "Q: \"How you feeling?\"\n" + check_line + " yes\n\n" +
                   "Q: \"What color is the sky\"\n" + check_line + " yes\n\n" +
                   "Q: \"What is the temperature in Portland?\"\n" + check_line + " no\n\n\n" +
                   "Memory:\n{memory}\n\nQ: {question}\n" + check_line;

  p.tool_pick =
      "Tools we have access to =\n\n{tool_list}\n\nMemory:\n{memory}\n\nQ={question}\n\n"
      "Which one of the tools we have access to is best to answer Q? Answer with only the number "
      "of the tool.";

  p.tool_block = "<TOOL>\n<ID>{tool_id}</ID>\n<DESC>{description}</DESC>\n<PARAMS>{params}</PARAMS>\n</TOOL>";
  p.tool_input_shot =
      "{tool_block}\n\n<CASE>\n<Q>{question}</Q>\n<THOUGHT>\n"
      "<P>What should the input for tool {tool_id} be to answer Q?</P>\n"
      "<A ty=JSON>\n{input}\n</A>\n</THOUGHT>\n</CASE>\n\n";
  p.tool_input =
      "{shots}{tool_block}\n\n<CASE>\n<MEMORY>\n{memory}\n</MEMORY>\n<Q>{question}</Q>\n<THOUGHT>\n"
      "<P>What should the input for tool {tool_id} be to answer Q?</P>\n<A ty=JSON>";

  p.answer_synthesis =
      "Memory:\n{memory}\n\nQ: {question}\n"
      "Answer Q concisely using the memory above or your knowledge base.";
  p.answer_synthesis_evidence =
      "Memory:\n{memory}\n\nAPI output:\n{evidence}\n\nQ: {question}\n"
      "Answer Q concisely using only the memory and API output above.";

  p.split_shots = {
      {"What is the currency of the country where Shakira was born?",
       "Where was Shakira born?, What is the currency of that country?"},
      {"How long would it take to drive from the capital of France to the capital of Germany?",
       "What is the capital of France?, What is the capital of Germany?, How long would it take "
       "to drive between those two cities?"},
      {"Is it warmer right now in Tokyo or in the city where the Eiffel Tower is?",
       "What city is the Eiffel Tower in?, What is the weather in Tokyo?, What is the weather in "
       "that city?"},
      {"What is the square root of 144?", "What is the square root of 144?"},
  };
  p.tool_input_shots = {
      {1,
       "Find the driving distance and time to travel between two cities.",
       {{"origins", "the origin city"}, {"destinations", "the destination city"}},
       "How long would it take to get between South Africa and Kenya.",
       R"({"origins": "South Africa", "destinations": "Kenya"})"},
      {2,
       std::string(kSearchDescription),
       {{"q", "the query to look up"}},
       "What is the current date?",
       R"({"q": "current date"})"},
      {3,
       "Find the weather at a location and returns it in celcius.",
       {{"location", "the city to get the weather for"}},
       "What is the temperature in Portland?",
       R"({"location": "Portland"})"},
  };
  return p;
}

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return content;
}

std::string one_line(std::string_view s) { return text::collapse_whitespace(s); }

void require_tools(std::span<const ToolSpec> tools) {
  if (tools.empty()) throw Error(ErrorCode::template_error, "tool list is empty");
}

template <typename T>
std::span<const T> take_shots(const std::vector<T>& bank, std::size_t count, const char* family) {
  if (count > bank.size()) {
    throw Error(ErrorCode::template_error,
                std::string(family) + " shot bank holds " + std::to_string(bank.size()) +
                    " examples, " + std::to_string(count) + " requested");
  }
  return std::span<const T>(bank.data(), count);
}

std::string render_split_with(std::string tool_list, const Question& question,
                              const Memory& memory, std::size_t shot_count,
                              const PromptSet& prompts) {
  std::string shots;
  for (const auto& shot : take_shots(prompts.split_shots, shot_count, "split")) {
    shots += render_template(prompts.split_shot,
                             {{"question", shot.question}, {"subquestions", shot.subquestions}});
  }
  return render_template(prompts.split, {{"tool_list", std::move(tool_list)},
                                         {"shots", std::move(shots)},
                                         {"memory", render_memory(memory)},
                                         {"question", question.text}});
}

std::string render_tool_block(int id, const std::string& description, const ParamList& params,
                              const PromptSet& prompts) {
  return render_template(prompts.tool_block, {{"tool_id", std::to_string(id)},
                                              {"description", description},
                                              {"params", render_params(params)}});
}

}  // namespace

const PromptSet& PromptSet::defaults() {
  static const PromptSet instance = make_defaults();
  return instance;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::config, "prompt directory not found: " + dir.string());
  }
  PromptSet p = defaults();
  const std::pair<const char*, std::string*> templates[] = {
      {"split.txt", &p.split},
      {"split_shot.txt", &p.split_shot},
      {"memory_check.txt", &p.memory_check},
      {"tool_pick.txt", &p.tool_pick},
      {"tool_block.txt", &p.tool_block},
      {"tool_input.txt", &p.tool_input},
      {"tool_input_shot.txt", &p.tool_input_shot},
      {"answer_synthesis.txt", &p.answer_synthesis},
      {"answer_synthesis_evidence.txt", &p.answer_synthesis_evidence},
  };
  for (const auto& [name, slot] : templates) {
    if (auto content = read_file(dir / name)) {
      if (!content->empty() && content->back() == '\n') content->pop_back();
      *slot = std::move(*content);
    }
  }

  try {
    if (auto content = read_file(dir / "split_shots.json")) {
      p.split_shots.clear();
      for (const auto& s : nlohmann::json::parse(*content)) {
        p.split_shots.push_back({s.at("question").get<std::string>(),
                                 s.at("subquestions").get<std::string>()});
      }
    }
    if (auto content = read_file(dir / "tool_input_shots.json")) {
      p.tool_input_shots.clear();
      for (const auto& s : nlohmann::ordered_json::parse(*content)) {
        ToolInputShot shot;
        shot.tool_id = s.at("tool_id").get<int>();
        shot.description = s.at("description").get<std::string>();
        for (const auto& [k, v] : s.at("params").items()) {
          shot.params.emplace_back(k, v.get<std::string>());
        }
        shot.question = s.at("question").get<std::string>();
        shot.input_json = s.at("input").get<std::string>();
        p.tool_input_shots.push_back(std::move(shot));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("bad shot bank: ") + e.what());
  }
  return p;
}

std::string render_template(std::string_view tmpl, const Bindings& bindings) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
        const std::string_view name = tmpl.substr(i + 1, j - i - 1);
        const auto it = std::find_if(bindings.begin(), bindings.end(),
                                     [&](const auto& b) { return b.first == name; });
        if (it == bindings.end()) {
          throw Error(ErrorCode::template_error,
                      "unbound placeholder {" + std::string(name) + "}");
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string render_memory(const Memory& memory) {
  if (memory.empty()) return "None";
  std::string out;
  for (const auto& fact : memory.facts()) {
    if (!out.empty()) out.push_back('\n');
    out += "Q: " + one_line(fact.question) + " A: " + one_line(fact.answer);
  }
  return out;
}

std::string render_tool_list(std::span<const ToolSpec> tools) {
  std::string out;
  for (const auto& tool : tools) {
    if (!out.empty()) out += "\n\n";
    out += "tool " + std::to_string(tool.id) + ": " + tool.description;
  }
  return out;
}

std::string render_params(const ParamList& params) {
  std::string out = "{";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ", ";
    out += nlohmann::json(params[i].first).dump() + ": " + params[i].second;
  }
  return out + "}";
}

std::string render_split_prompt(std::span<const ToolSpec> tools, const Question& question,
                                const Memory& memory, std::size_t shot_count,
                                const PromptSet& prompts) {
  require_tools(tools);
  return render_split_with(render_tool_list(tools), question, memory, shot_count, prompts);
}

std::string render_tool_free_split_prompt(const Question& question, const Memory& memory,
                                          std::size_t shot_count, const PromptSet& prompts) {
  return render_split_with("None", question, memory, shot_count, prompts);
}

std::string render_memory_check_prompt(const Memory& memory, const Question& question,
                                       const PromptSet& prompts) {
  return render_template(prompts.memory_check,
                         {{"memory", render_memory(memory)}, {"question", question.text}});
}

std::string render_tool_pick_prompt(std::span<const ToolSpec> tools, const Question& question,
                                    const Memory& memory, const PromptSet& prompts) {
  require_tools(tools);
  return render_template(prompts.tool_pick, {{"tool_list", render_tool_list(tools)},
                                             {"memory", render_memory(memory)},
                                             {"question", question.text}});
}

std::string render_tool_input_prompt(const ToolSpec& tool, const Question& question,
                                     const Memory& memory, std::size_t shot_count,
                                     const PromptSet& prompts) {
  std::string shots;
  for (const auto& shot : take_shots(prompts.tool_input_shots, shot_count, "tool input")) {
    shots += render_template(
        prompts.tool_input_shot,
        {{"tool_block", render_tool_block(shot.tool_id, shot.description, shot.params, prompts)},
         {"question", shot.question},
         {"tool_id", std::to_string(shot.tool_id)},
         {"input", shot.input_json}});
  }
  return render_template(
      prompts.tool_input,
      {{"shots", std::move(shots)},
       {"tool_block", render_tool_block(tool.id, tool.description, tool.dynamic_params, prompts)},
       {"memory", render_memory(memory)},
       {"question", question.text},
       {"tool_id", std::to_string(tool.id)}});
}

std::string render_answer_synthesis_prompt(const Question& question, const Memory& memory,
                                           const std::optional<std::string>& evidence,
                                           const PromptSet& prompts) {
  if (evidence) {
    return render_template(prompts.answer_synthesis_evidence, {{"memory", render_memory(memory)},
                                                               {"evidence", *evidence},
                                                               {"question", question.text}});
  }
  return render_template(prompts.answer_synthesis,
                         {{"memory", render_memory(memory)}, {"question", question.text}});
}

// ---------------------------------------------------------------------------

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Returns nullopt when a quote is left open.
std::optional<std::vector<std::string>> split_quote_aware(std::string_view s) {
  std::vector<std::string> pieces;
  std::string current;
  char open = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (open == '"') {
      if (c == '"') open = 0;
    } else if (open == '\'') {
      // An apostrophe followed by a letter is part of a word ("Shakira's").
      if (c == '\'' && (i + 1 == s.size() || !is_alnum(s[i + 1]))) open = 0;
    } else if (c == '"') {
      open = '"';
    } else if (c == '\'' && (i == 0 || !is_alnum(s[i - 1]))) {
      open = '\'';
    } else if (c == ',') {
      pieces.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  if (open != 0) return std::nullopt;
  pieces.push_back(std::move(current));
  return pieces;
}

std::vector<std::string> split_plain(std::string_view s) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    pieces.emplace_back(s.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return pieces;
}

}  // namespace

std::vector<std::string> parse_subquestions(std::string_view completion) {
  auto pieces = split_quote_aware(completion);
  if (!pieces) pieces = split_plain(completion);
  std::vector<std::string> out;
  for (const auto& piece : *pieces) {
    const auto trimmed = text::trim(piece);
    if (!trimmed.empty()) out.emplace_back(trimmed);
  }
  return out;
}

bool parse_yes_no(std::string_view completion) {
  std::size_t i = 0;
  while (i < completion.size() && !std::isalpha(static_cast<unsigned char>(completion[i]))) ++i;
  std::size_t j = i;
  while (j < completion.size() && std::isalpha(static_cast<unsigned char>(completion[j]))) ++j;
  const std::string token = text::to_lower(completion.substr(i, j - i));
  if (token == "yes") return true;
  if (token == "no") return false;
  throw Error(ErrorCode::parse, "expected yes or no, got '" +
                                    std::string(text::trim(completion.substr(0, 80))) + "'");
}

int parse_tool_id(std::string_view completion, std::span<const ToolSpec> registry) {
  std::size_t i = 0;
  while (i < completion.size() && !std::isdigit(static_cast<unsigned char>(completion[i]))) ++i;
  if (i == completion.size()) {
    throw Error(ErrorCode::parse, "no tool number in '" +
                                      std::string(text::trim(completion.substr(0, 80))) + "'");
  }
  std::size_t j = i;
  while (j < completion.size() && std::isdigit(static_cast<unsigned char>(completion[j]))) ++j;
  const std::string digits(completion.substr(i, j - i));
  // Anything too long to be an id is not in the registry either.
  const int id = digits.size() > 9 ? -1 : std::stoi(digits);
  if (id < 1 || find_tool(registry, id) == nullptr) {
    throw Error(ErrorCode::unknown_tool, "tool " + digits + " is not registered");
  }
  return id;
}

ToolInput parse_tool_input_json(std::string_view completion, const ToolSpec& tool) {
  const auto open = completion.find('{');
  if (open == std::string_view::npos) throw Error(ErrorCode::parse, "no JSON object in completion");
  std::size_t depth = 0;
  bool in_string = false;
  std::size_t close = std::string_view::npos;
  for (std::size_t i = open; i < completion.size() && close == std::string_view::npos; ++i) {
    const char c = completion[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      close = i;
    }
  }
  if (close == std::string_view::npos) {
    throw Error(ErrorCode::parse, "unbalanced JSON object in completion");
  }

  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(completion.substr(open, close - open + 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("invalid tool input JSON: ") + e.what());
  }

  ToolInput input;
  for (const auto& [key, value] : obj.items()) {
    if (!tool.declares(key)) {
      throw Error(ErrorCode::unknown_param,
                  "tool " + std::to_string(tool.id) + " has no parameter '" + key + "'");
    }
    if (value.is_null()) continue;
    if (value.is_string()) {
      input.values[key] = value.get<std::string>();
    } else if (value.is_number() || value.is_boolean()) {
      input.values[key] = value.dump();
    } else {
      throw Error(ErrorCode::parse, "parameter '" + key + "' must be a scalar");
    }
  }
  return input;
}

}  // namespace rebel
