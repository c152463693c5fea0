#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rebel/core.hpp"

namespace rebel::eval {

enum class TaskKind { retrieval, verification };
enum class Label { supports, refutes };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view name);
std::string_view to_string(Label label);

struct EvalItem {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;  // retrieval
  std::optional<Label> gold_label;        // verification
  std::string category;
  TaskKind task_kind = TaskKind::retrieval;
};

struct Dataset {
  std::vector<EvalItem> items;
  std::size_t dropped = 0;  // verification items outside SUPPORTS/REFUTES
};

/// Line-delimited JSON: {"id", "question", "answer" | "answers" | "label",
/// "category"?}. Items without a category land in "all". Throws
/// FormatError with the offending line number.
Dataset load_dataset(std::istream& in, TaskKind kind);

/// True when any gold answer occurs in the output, ignoring case and
/// differences in whitespace.
bool grade_retrieval(std::string_view output, std::span<const std::string> gold_answers);

/// The first truth-determining word of the output, with a directly
/// preceding negation flipping it. Nullopt when nothing determines a
/// verdict.
std::optional<Label> map_verdict(std::string_view output);

bool grade_verification(std::string_view output, Label gold);

struct ItemRecord {
  std::string id;
  std::string category;
  std::string question;
  std::string output;
  bool correct = false;
  std::optional<std::string> error;
  double wall_seconds = 0.0;
  std::size_t completion_calls = 0;
  std::size_t tool_calls = 0;
};

struct Score {
  std::string category;
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const { return total == 0 ? 0.0 : 100.0 * double(correct) / double(total); }
};

struct EvalReport {
  TaskKind task = TaskKind::retrieval;
  std::string mode;
  std::vector<ItemRecord> items;   // sorted by id
  std::vector<Score> categories;   // in order of first appearance
  Score overall{"overall"};
  double mean_latency_seconds = 0.0;
  std::size_t dropped = 0;
};

struct Sampling {
  std::size_t per_category = 0;
  std::uint64_t seed = 0;
};

/// Deterministic per-category sample; selected items keep dataset order.
std::vector<EvalItem> sample_items(std::span<const EvalItem> items, const Sampling& sampling);

/// Answers one item. Each call must use a fresh run context.
using ItemRunner = std::function<AnswerResult(const EvalItem&)>;

/// Runs, grades and aggregates. A failing item is graded incorrect and its
/// error recorded; the evaluation itself keeps going.
EvalReport run_eval(std::span<const EvalItem> items, const ItemRunner& runner,
                    const std::optional<Sampling>& sampling = std::nullopt,
                    std::size_t jobs = 1);

/// Recomputes per-category and overall scores from item verdicts.
void aggregate(EvalReport& report);

std::string format_table(const EvalReport& report, bool timing);
std::string report_to_json(const EvalReport& report, bool timing);

/// One accuracy column per named report, rows by category.
std::string format_comparison(std::span<const std::pair<std::string, EvalReport>> reports,
                              bool timing);

}  // namespace rebel::eval
