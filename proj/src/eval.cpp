#include "rebel/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "json.hpp"
#include "rebel/engine.hpp"
#include "rebel/text.hpp"

namespace rebel::eval {
namespace {

constexpr std::string_view kDefaultCategory = "all";

std::string fixed1(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  return buf;
}

std::string fixed3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::vector<std::string> words(std::string_view output) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < output.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(output[i]);
    if (c == '\'') continue;
    // U+2019 right single quotation mark, as in "isn’t".
    if (c == 0xE2 && output.substr(i, 3) == "\xE2\x80\x99") {
      i += 2;
      continue;
    }
    if (std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::retrieval ? "retrieval" : "verification";
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) {
  if (name == "retrieval") return TaskKind::retrieval;
  if (name == "verification") return TaskKind::verification;
  return std::nullopt;
}

std::string_view to_string(Label label) {
  return label == Label::supports ? "SUPPORTS" : "REFUTES";
}

Dataset load_dataset(std::istream& in, TaskKind kind) {
  Dataset dataset;
  std::set<std::string> ids;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (text::trim(raw).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw FormatError("expected a JSON object", line_no);

    EvalItem item;
    item.task_kind = kind;
    const auto id = obj.find("id");
    if (id == obj.end()) throw FormatError("missing field 'id'", line_no);
    if (id->is_string()) {
      item.id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      item.id = id->dump();
    } else {
      throw FormatError("field 'id' must be a string or integer", line_no);
    }
    if (item.id.empty()) throw FormatError("empty id", line_no);
    const auto question = obj.find("question");
    if (question == obj.end() || !question->is_string() ||
        text::trim(question->get<std::string>()).empty()) {
      throw FormatError("missing or empty field 'question'", line_no);
    }
    item.question = question->get<std::string>();
    const auto category = obj.find("category");
    if (category != obj.end() && !category->is_null()) {
      if (!category->is_string()) throw FormatError("field 'category' must be a string", line_no);
      item.category = category->get<std::string>();
    }
    if (item.category.empty()) item.category = kDefaultCategory;

    if (kind == TaskKind::retrieval) {
      if (const auto a = obj.find("answers"); a != obj.end()) {
        if (!a->is_array()) throw FormatError("field 'answers' must be an array", line_no);
        for (const auto& g : *a) {
          if (!g.is_string()) throw FormatError("answers must be strings", line_no);
          if (!text::trim(g.get<std::string>()).empty()) {
            item.gold_answers.push_back(g.get<std::string>());
          }
        }
      } else if (const auto one = obj.find("answer"); one != obj.end() && one->is_string()) {
        if (!text::trim(one->get<std::string>()).empty()) {
          item.gold_answers.push_back(one->get<std::string>());
        }
      }
      if (item.gold_answers.empty()) throw FormatError("retrieval item needs answers", line_no);
    } else {
      const auto label = obj.find("label");
      if (label == obj.end() || !label->is_string()) {
        throw FormatError("verification item needs a string 'label'", line_no);
      }
      const std::string value = label->get<std::string>();
      if (value == "SUPPORTS") {
        item.gold_label = Label::supports;
      } else if (value == "REFUTES") {
        item.gold_label = Label::refutes;
      } else {
        ++dataset.dropped;
        continue;
      }
    }
    if (!ids.insert(item.id).second) throw FormatError("duplicate id '" + item.id + "'", line_no);
    dataset.items.push_back(std::move(item));
  }
  return dataset;
}

bool grade_retrieval(std::string_view output, std::span<const std::string> gold_answers) {
  const std::string haystack = text::to_lower(text::collapse_whitespace(output));
  return std::any_of(gold_answers.begin(), gold_answers.end(), [&](const std::string& gold) {
    const std::string needle = text::to_lower(text::collapse_whitespace(gold));
    return !needle.empty() && haystack.find(needle) != std::string::npos;
  });
}

std::optional<Label> map_verdict(std::string_view output) {
  static const std::set<std::string> kSupports = {"supports", "support", "supported", "true",
                                                  "yes",      "correct", "accurate"};
  static const std::set<std::string> kRefutes = {"refutes", "refute",    "refuted",   "false",
                                                 "no",      "incorrect", "inaccurate", "untrue"};
  static const std::set<std::string> kNegations = {"not",  "isnt", "doesnt", "arent",
                                                   "wasnt", "dont", "never"};
  const auto tokens = words(output);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::optional<Label> label;
    if (kSupports.contains(tokens[i])) label = Label::supports;
    if (kRefutes.contains(tokens[i])) label = Label::refutes;
    if (!label) continue;
    if (i > 0 && kNegations.contains(tokens[i - 1])) {
      label = *label == Label::supports ? Label::refutes : Label::supports;
    }
    return label;
  }
  return std::nullopt;
}

bool grade_verification(std::string_view output, Label gold) {
  const auto label = map_verdict(output);
  return label && *label == gold;
}

std::vector<EvalItem> sample_items(std::span<const EvalItem> items, const Sampling& sampling) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto [it, inserted] = by_category.try_emplace(items[i].category);
    if (inserted) order.push_back(items[i].category);
    it->second.push_back(i);
  }
  // mt19937_64 output is fixed by the standard, unlike the distributions.
  std::mt19937_64 rng(sampling.seed);
  std::vector<std::size_t> chosen;
  for (const auto& category : order) {
    auto pool = by_category[category];
    const std::size_t take = std::min(sampling.per_category, pool.size());
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng() % (pool.size() - k));
      std::swap(pool[k], pool[j]);
      chosen.push_back(pool[k]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<EvalItem> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(items[i]);
  return out;
}

void aggregate(EvalReport& report) {
  std::vector<Score> scores = report.categories;
  for (auto& s : scores) s.correct = s.total = 0;
  report.overall = Score{"overall"};
  double latency = 0.0;
  for (const auto& item : report.items) {
    auto it = std::find_if(scores.begin(), scores.end(),
                           [&](const Score& s) { return s.category == item.category; });
    if (it == scores.end()) it = scores.insert(scores.end(), Score{item.category});
    ++it->total;
    ++report.overall.total;
    if (item.correct) {
      ++it->correct;
      ++report.overall.correct;
    }
    latency += item.wall_seconds;
  }
  std::erase_if(scores, [](const Score& s) { return s.total == 0; });
  report.categories = std::move(scores);
  report.mean_latency_seconds = report.items.empty() ? 0.0 : latency / double(report.items.size());
}

EvalReport run_eval(std::span<const EvalItem> all_items, const ItemRunner& runner,
                    const std::optional<Sampling>& sampling, std::size_t jobs) {
  if (all_items.empty()) throw Error(ErrorCode::precondition, "no items to evaluate");
  const std::vector<EvalItem> items =
      sampling ? sample_items(all_items, *sampling)
               : std::vector<EvalItem>(all_items.begin(), all_items.end());

  EvalReport report;
  report.task = items.empty() ? TaskKind::retrieval : items.front().task_kind;
  for (const auto& item : items) {
    if (std::none_of(report.categories.begin(), report.categories.end(),
                     [&](const Score& s) { return s.category == item.category; })) {
      report.categories.push_back(Score{item.category});
    }
  }

  std::vector<ItemRecord> records(items.size());
  auto evaluate = [&](std::size_t i) {
    const EvalItem& item = items[i];
    ItemRecord& rec = records[i];
    rec.id = item.id;
    rec.category = item.category;
    rec.question = item.question;
    try {
      const AnswerResult result = runner(item);
      rec.output = result.answer;
      rec.wall_seconds = result.metrics.wall_seconds;
      rec.completion_calls = result.metrics.completion_calls;
      rec.tool_calls = result.metrics.tool_calls;
      rec.correct = item.task_kind == TaskKind::retrieval
                        ? grade_retrieval(rec.output, item.gold_answers)
                        : grade_verification(rec.output, *item.gold_label);
    } catch (const RunError& e) {
      rec.error = e.what();
      rec.wall_seconds = e.metrics().wall_seconds;
      rec.completion_calls = e.metrics().completion_calls;
      rec.tool_calls = e.metrics().tool_calls;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, items.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) evaluate(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::sort(records.begin(), records.end(),
            [](const ItemRecord& a, const ItemRecord& b) { return a.id < b.id; });
  report.items = std::move(records);
  aggregate(report);
  return report;
}

std::string format_table(const EvalReport& report, bool timing) {
  std::size_t width = std::string("category").size();
  for (const auto& s : report.categories) width = std::max(width, s.category.size());
  width += 2;
  const std::string rule(width + 10, '-');

  std::string out;
  out += pad_right("category", width) + pad_left("accuracy", 10) + "\n" + rule + "\n";
  for (const auto& s : report.categories) {
    out += pad_right(s.category, width) + pad_left(fixed1(s.accuracy()), 10) + "\n";
  }
  out += rule + "\n";
  out += pad_right("overall", width) + pad_left(fixed1(report.overall.accuracy()), 10) + "\n";
  out += "items: " + std::to_string(report.overall.total) +
         ", correct: " + std::to_string(report.overall.correct) + "\n";
  if (report.dropped > 0) {
    out += "dropped (label not SUPPORTS/REFUTES): " + std::to_string(report.dropped) + "\n";
  }
  if (timing) out += "mean time per question (s): " + fixed3(report.mean_latency_seconds) + "\n";
  return out;
}

std::string report_to_json(const EvalReport& report, bool timing) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json root;
  root["task"] = to_string(report.task);
  root["mode"] = report.mode;
  root["dropped"] = report.dropped;
  ordered_json categories = ordered_json::array();
  for (const auto& s : report.categories) {
    categories.push_back({{"category", s.category},
                          {"correct", s.correct},
                          {"total", s.total},
                          {"accuracy", s.accuracy()}});
  }
  root["categories"] = std::move(categories);
  root["overall"] = {{"correct", report.overall.correct},
                     {"total", report.overall.total},
                     {"accuracy", report.overall.accuracy()}};
  if (timing) root["mean_latency_seconds"] = report.mean_latency_seconds;
  ordered_json items = ordered_json::array();
  for (const auto& r : report.items) {
    ordered_json item;
    item["id"] = r.id;
    item["category"] = r.category;
    item["question"] = r.question;
    item["output"] = r.output;
    item["correct"] = r.correct;
    item["error"] = r.error ? ordered_json(*r.error) : ordered_json(nullptr);
    item["completion_calls"] = r.completion_calls;
    item["tool_calls"] = r.tool_calls;
    if (timing) item["wall_seconds"] = r.wall_seconds;
    items.push_back(std::move(item));
  }
  root["items"] = std::move(items);
  return root.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string format_comparison(std::span<const std::pair<std::string, EvalReport>> reports,
                              bool timing) {
  std::vector<std::string> categories;
  for (const auto& [name, report] : reports) {
    for (const auto& s : report.categories) {
      if (std::find(categories.begin(), categories.end(), s.category) == categories.end()) {
        categories.push_back(s.category);
      }
    }
  }
  std::size_t width = std::string("category").size();
  for (const auto& c : categories) width = std::max(width, c.size());
  width += 2;
  std::vector<std::size_t> col;
  for (const auto& [name, report] : reports) col.push_back(std::max<std::size_t>(name.size(), 8) + 2);

  std::string out = pad_right("category", width);
  for (std::size_t i = 0; i < reports.size(); ++i) out += pad_left(reports[i].first, col[i]);
  out += "\n";
  std::size_t total_width = width;
  for (std::size_t w : col) total_width += w;
  const std::string rule(total_width, '-');
  out += rule + "\n";

  auto row = [&](const std::string& label, auto&& value) {
    std::string line = pad_right(label, width);
    for (std::size_t i = 0; i < reports.size(); ++i) line += pad_left(value(reports[i].second), col[i]);
    return line + "\n";
  };
  for (const auto& c : categories) {
    out += row(c, [&](const EvalReport& r) -> std::string {
      const auto it = std::find_if(r.categories.begin(), r.categories.end(),
                                   [&](const Score& s) { return s.category == c; });
      return it == r.categories.end() ? "-" : fixed1(it->accuracy());
    });
  }
  out += rule + "\n";
  out += row("overall", [](const EvalReport& r) { return fixed1(r.overall.accuracy()); });
  if (timing) {
    out += row("time (s)", [](const EvalReport& r) { return fixed3(r.mean_latency_seconds); });
  }
  return out;
}

}  // namespace rebel::eval
