#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "rebel/backend.hpp"

namespace rebel {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kFormatName = "rebel-transcript";
constexpr int kFormatVersion = 1;
constexpr std::string_view kDigestName = "sha256-hex";

std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw FormatError(std::string("missing or non-string field '") + key + "'", line);
  }
  return it->get<std::string>();
}

void check_header(const nlohmann::json& header, std::size_t line) {
  if (header.value("format", "") != kFormatName) {
    throw FormatError("unrecognised transcript format", line);
  }
  const auto version = header.find("version");
  if (version == header.end() || !version->is_number_integer() ||
      version->get<int>() != kFormatVersion) {
    throw FormatError("unsupported transcript version", line);
  }
  if (header.value("digest", "") != kDigestName) {
    throw FormatError("unsupported digest algorithm", line);
  }
}

}  // namespace

std::vector<TranscriptEntry> load_transcript(std::istream& in) {
  std::vector<TranscriptEntry> entries;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw FormatError("expected a JSON object", line_no);

    if (obj.contains("format")) {
      if (seen_content) throw FormatError("header must be the first line", line_no);
      check_header(obj, line_no);
      seen_content = true;
      continue;
    }
    seen_content = true;

    TranscriptEntry entry;
    const auto index = obj.find("index");
    if (index == obj.end() || !index->is_number_unsigned()) {
      throw FormatError("missing or invalid field 'index'", line_no);
    }
    entry.index = index->get<std::size_t>();
    const std::string purpose = require_string(obj, "purpose", line_no);
    const auto parsed = purpose_from_string(purpose);
    if (!parsed) throw FormatError("unknown purpose '" + purpose + "'", line_no);
    entry.purpose = *parsed;
    entry.prompt_digest = require_string(obj, "prompt_digest", line_no);
    entry.prompt = require_string(obj, "prompt", line_no);
    entry.completion = require_string(obj, "completion", line_no);

    if (entry.index != entries.size()) {
      throw Error(ErrorCode::integrity, "line " + std::to_string(line_no) + ": expected index " +
                                            std::to_string(entries.size()) + ", found " +
                                            std::to_string(entry.index));
    }
    if (sha256_hex(entry.prompt) != entry.prompt_digest) {
      throw Error(ErrorCode::integrity,
                  "line " + std::to_string(line_no) + ": prompt digest does not match prompt");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

void write_transcript(std::ostream& out, std::span<const TranscriptEntry> entries) {
  ordered_json header;
  header["format"] = kFormatName;
  header["version"] = kFormatVersion;
  header["digest"] = kDigestName;
  out << header.dump() << '\n';
  for (const auto& e : entries) {
    ordered_json obj;
    obj["index"] = e.index;
    obj["purpose"] = to_string(e.purpose);
    obj["prompt_digest"] = e.prompt_digest;
    obj["prompt"] = e.prompt;
    obj["completion"] = e.completion;
    out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

}  // namespace rebel
