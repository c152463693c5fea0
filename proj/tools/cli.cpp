#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rebel/backend.hpp"
#include "rebel/config.hpp"
#include "rebel/engine.hpp"
#include "rebel/eval.hpp"
#include "rebel/featurizer.hpp"
#include "rebel/prompting.hpp"
#include "rebel/tools.hpp"

namespace rebel::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kRunFailed = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string config_path;
  std::string backend_path;
  std::string tools_path;
  std::string record_path;
  std::string replay_path;
  int verbosity = 0;

  // ask
  std::string question;
  // eval
  std::string dataset_path;
  std::string task = "retrieval";
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string json_out;
  std::string mode = "full";
  bool timing = false;
  // tools
  bool show_hidden = false;
};

/// Raised for anything the operator has to fix before a run can start.
struct ConfigProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_config_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::format:
    case ErrorCode::integrity:
    case ErrorCode::validation:
    case ErrorCode::template_error:
      return true;
    default:
      return false;
  }
}

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigProblem(std::string("cannot open ") + what + ": " + path);
  return in;
}

EngineConfig read_engine_config(const Options& o) {
  if (o.config_path.empty()) return EngineConfig{};
  auto in = open_input(o.config_path, "engine config");
  return load_engine_config(in, fs::path(o.config_path).parent_path());
}

std::vector<ToolSpec> read_registry(const Options& o) {
  if (o.tools_path.empty()) return {};
  auto in = open_input(o.tools_path, "tool registry");
  return load_registry(in);
}

PromptSet read_prompts(const EngineConfig& cfg) {
  return cfg.prompt_dir ? PromptSet::load(*cfg.prompt_dir) : PromptSet::defaults();
}

std::unique_ptr<Featurizer> make_featurizer(const EngineConfig& cfg) {
  if (cfg.featurizer == FeaturizerKind::remote) {
    return std::make_unique<RemoteFeaturizer>(cfg.remote_embedding);
  }
  return std::make_unique<TrigramFeaturizer>();
}

std::optional<BackendConfig> read_backend_config(const Options& o) {
  if (o.backend_path.empty()) return std::nullopt;
  auto in = open_input(o.backend_path, "backend config");
  return load_backend_config(in, fs::path(o.backend_path).parent_path());
}

ScriptBook read_script(const BackendConfig& cfg) {
  auto in = open_input(cfg.script.string(), "script");
  return ScriptBook::load(in);
}

std::vector<TranscriptEntry> read_transcript(const fs::path& path) {
  auto in = open_input(path.string(), "transcript");
  return load_transcript(in);
}

void write_transcript_file(const fs::path& path, const std::vector<TranscriptEntry>& entries) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigProblem("cannot write transcript: " + path.string());
  write_transcript(out, entries);
}

void print_totals(std::ostream& out, const RunMetrics& m) {
  std::ostringstream secs;
  secs.precision(3);
  secs << std::fixed << m.wall_seconds;
  out << "completion calls: " << m.completion_calls << ", tool calls: " << m.tool_calls
      << ", wall seconds: " << secs.str() << "\n";
}

void format_node(const TraceNode& node, bool timing, std::string& out) {
  out.append(static_cast<std::size_t>(node.depth) * 2, ' ');
  out += "- [";
  out += to_string(node.path);
  if (node.tool_id) out += " " + std::to_string(*node.tool_id);
  if (node.fallback) out += ", fallback";
  out += "] " + node.question;
  if (!node.answer.empty()) out += " => " + node.answer;
  if (!node.pruned.empty()) out += " (pruned " + std::to_string(node.pruned.size()) + ")";
  if (timing) {
    std::ostringstream secs;
    secs.precision(3);
    secs << std::fixed << node.wall_seconds;
    out += " [" + secs.str() + "s]";
  }
  out += "\n";
  for (const auto& child : node.children) format_node(child, timing, out);
}

// ---------------------------------------------------------------------------

int cmd_ask(const Options& o, std::ostream& out, std::ostream& err) {
  const EngineConfig cfg = read_engine_config(o);
  const auto registry = read_registry(o);
  const PromptSet prompts = read_prompts(cfg);
  const auto featurizer = make_featurizer(cfg);

  std::unique_ptr<CompletionBackend> base;
  if (!o.replay_path.empty()) {
    base = std::make_unique<ReplayBackend>(read_transcript(o.replay_path));
  } else {
    const auto backend_cfg = read_backend_config(o);
    if (!backend_cfg) throw ConfigProblem("ask needs --backend or --replay");
    if (backend_cfg->kind == BackendKind::http) {
      base = std::make_unique<HttpCompletionBackend>(backend_cfg->http);
    } else {
      auto script = read_script(*backend_cfg).find("ask", {"default"});
      if (!script) throw ConfigProblem("script has no 'ask' or 'default' run");
      base = std::make_unique<ScriptedBackend>(std::move(*script));
    }
  }
  std::optional<RecordingBackend> recorder;
  CompletionBackend* backend = base.get();
  if (!o.record_path.empty()) backend = &recorder.emplace(*base);

  HttpToolExecutor executor;
  const Engine engine(cfg, registry, *backend, *featurizer, executor, prompts);
  auto save = [&] {
    if (recorder) write_transcript_file(o.record_path, recorder->transcript());
  };
  try {
    const AnswerResult result = engine.answer(o.question);
    save();
    out << result.answer << "\n";
    if (o.verbosity >= 2) out << format_trace(result.trace, true);
    if (o.verbosity >= 1) print_totals(out, result.metrics);
    return kOk;
  } catch (const RunError& e) {
    save();
    err << "error: " << e.what() << "\n";
    err << "failing node: " << e.trace_path() << "\n";
    if (o.verbosity >= 2) err << format_trace(e.partial_trace(), true);
    if (o.verbosity >= 1) print_totals(err, e.metrics());
    return kRunFailed;
  }
}

bool safe_file_stem(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

struct Mode {
  std::string key;
  std::string column;
};

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes = {
      {"gpt3", "GPT3"}, {"no-tools", "REBEL w/o tools"}, {"full", "REBEL"}};
  return modes;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
  const auto kind = eval::task_kind_from_string(o.task);
  if (!kind) throw ConfigProblem("--task must be retrieval or verification");
  std::vector<Mode> modes;
  for (const auto& m : all_modes()) {
    if (o.mode == "all" || o.mode == m.key) modes.push_back(m);
  }
  if (modes.empty()) throw ConfigProblem("--mode must be full, no-tools, gpt3 or all");
  if (o.jobs == 0) throw ConfigProblem("--jobs must be at least 1");

  auto data_in = open_input(o.dataset_path, "dataset");
  const eval::Dataset dataset = eval::load_dataset(data_in, *kind);
  if (dataset.items.empty()) throw ConfigProblem("dataset has no usable items");
  if (!o.record_path.empty() || !o.replay_path.empty()) {
    for (const auto& item : dataset.items) {
      if (!safe_file_stem(item.id)) {
        throw ConfigProblem("item id '" + item.id + "' cannot name a transcript file");
      }
    }
  }

  const EngineConfig base_cfg = read_engine_config(o);
  const auto registry = read_registry(o);
  const PromptSet prompts = read_prompts(base_cfg);
  const auto featurizer = make_featurizer(base_cfg);

  std::optional<BackendConfig> backend_cfg;
  std::unique_ptr<CompletionBackend> shared_backend;
  std::optional<ScriptBook> script;
  if (o.replay_path.empty()) {
    backend_cfg = read_backend_config(o);
    if (!backend_cfg) throw ConfigProblem("eval needs --backend or --replay");
    if (backend_cfg->kind == BackendKind::http) {
      shared_backend = std::make_unique<HttpCompletionBackend>(backend_cfg->http);
    } else {
      script = read_script(*backend_cfg);
    }
  }

  HttpToolExecutor executor;
  std::optional<eval::Sampling> sampling;
  if (o.sample > 0) sampling = eval::Sampling{o.sample, o.seed};

  std::vector<std::pair<std::string, eval::EvalReport>> reports;
  for (const auto& mode : modes) {
    EngineConfig cfg = base_cfg;
    std::vector<ToolSpec> mode_registry = registry;
    if (mode.key != "full") mode_registry.clear();
    if (mode.key == "gpt3") cfg.enable_split = false;

    auto runner = [&](const eval::EvalItem& item) -> AnswerResult {
      std::unique_ptr<CompletionBackend> own;
      CompletionBackend* backend = shared_backend.get();
      if (!o.replay_path.empty()) {
        own = std::make_unique<ReplayBackend>(
            read_transcript(fs::path(o.replay_path) / mode.key / (item.id + ".jsonl")));
        backend = own.get();
      } else if (script) {
        auto completions = script->find(mode.key + "/" + item.id, {item.id});
        if (!completions) throw Error(ErrorCode::replay_exhausted, "no script for " + item.id);
        own = std::make_unique<ScriptedBackend>(std::move(*completions));
        backend = own.get();
      }
      std::optional<RecordingBackend> recorder;
      if (!o.record_path.empty()) backend = &recorder.emplace(*backend);
      const Engine engine(cfg, mode_registry, *backend, *featurizer, executor, prompts);
      auto save = [&] {
        if (recorder) {
          write_transcript_file(fs::path(o.record_path) / mode.key / (item.id + ".jsonl"),
                                recorder->transcript());
        }
      };
      try {
        AnswerResult result = engine.answer(item.question);
        save();
        return result;
      } catch (...) {
        save();
        throw;
      }
    };

    eval::EvalReport report = eval::run_eval(dataset.items, runner, sampling, o.jobs);
    report.mode = mode.key;
    report.dropped = dataset.dropped;
    reports.emplace_back(mode.column, std::move(report));
  }

  if (reports.size() == 1) {
    out << eval::format_table(reports.front().second, o.timing);
  } else {
    out << eval::format_comparison(reports, o.timing);
  }

  if (!o.json_out.empty()) {
    std::string doc;
    if (reports.size() == 1) {
      doc = eval::report_to_json(reports.front().second, o.timing);
    } else {
      nlohmann::ordered_json combined;
      for (const auto& [column, report] : reports) {
        combined["modes"][report.mode] = nlohmann::ordered_json::parse(
            eval::report_to_json(report, o.timing));
      }
      doc = combined.dump(2) + "\n";
    }
    std::ofstream json_out(o.json_out, std::ios::binary | std::ios::trunc);
    if (!json_out) throw ConfigProblem("cannot write " + o.json_out);
    json_out << doc;
  }
  return kOk;
}

int cmd_tools(const Options& o, std::ostream& out, std::ostream&) {
  const auto registry = read_registry(o);
  if (registry.empty()) out << "no tools registered\n";
  for (const auto& tool : registry) {
    out << "tool " << tool.id << ": " << tool.description << "\n";
    out << "  params: " << render_params(tool.dynamic_params) << "\n";
    if (!o.show_hidden) continue;
    out << "  name: " << tool.name << "\n";
    out << "  method: " << to_string(tool.method) << "\n";
    out << "  endpoint: " << tool.endpoint << "\n";
    for (const auto& [k, v] : tool.static_params) out << "  static " << k << ": ****\n";
    for (const auto& [k, v] : tool.headers) out << "  header " << k << ": ****\n";
  }
  return kOk;
}

}  // namespace

std::string format_trace(const TraceNode& root, bool timing) {
  std::string out;
  format_node(root, timing, out);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Answer compositional questions by recursive decomposition and tool use", "rebel"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "Engine config (JSON)");
  app.add_option("--backend", o.backend_path, "Completion backend config (JSON)");
  app.add_option("--tools", o.tools_path, "Tool registry (JSON)");
  app.add_option("--record", o.record_path,
                 "Record completions (ask: transcript file, eval: directory)");
  app.add_option("--replay", o.replay_path,
                 "Replay completions (ask: transcript file, eval: directory)");
  app.add_flag("-v", o.verbosity, "More output; repeat for the trace tree");

  auto* ask = app.add_subcommand("ask", "Answer one question");
  ask->add_option("question", o.question, "The question")->required();
  ask->fallthrough();

  auto* ev = app.add_subcommand("eval", "Run and grade a dataset");
  ev->add_option("dataset", o.dataset_path, "Line-delimited JSON dataset")->required();
  ev->add_option("--task", o.task, "retrieval or verification");
  ev->add_option("--sample", o.sample, "Items to sample per category (0 = all)");
  ev->add_option("--seed", o.seed, "Sampling seed");
  ev->add_option("--jobs", o.jobs, "Items evaluated concurrently");
  ev->add_option("--json-out", o.json_out, "Write the JSON report here");
  ev->add_option("--mode", o.mode, "full, no-tools, gpt3 or all");
  ev->add_flag("--timing", o.timing, "Include wall-clock latency in reports");
  ev->fallthrough();

  auto* tl = app.add_subcommand("tools", "List registered tools as the model sees them");
  tl->add_flag("--show-hidden", o.show_hidden, "Also show method, endpoint and static names");
  tl->fallthrough();

  std::vector<const char*> argv;
  argv.push_back("rebel");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (!o.record_path.empty() && !o.replay_path.empty()) {
      throw ConfigProblem("--record and --replay cannot be combined");
    }
    if (ask->parsed()) return cmd_ask(o, out, err);
    if (ev->parsed()) return cmd_eval(o, out, err);
    return cmd_tools(o, out, err);
  } catch (const ConfigProblem& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (is_config_code(e.code()) || e.code() == ErrorCode::precondition) return kConfigError;
    return kRunFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRunFailed;
  }
}

}  // namespace rebel::cli
