#include "rebel/tools.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <iterator>
#include <set>

#include "json.hpp"
#include "rebel/http.hpp"
#include "rebel/text.hpp"

namespace rebel {
namespace {

using ordered_json = nlohmann::ordered_json;

std::size_t line_of_offset(std::string_view doc, std::size_t offset) {
  offset = std::min(offset, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + offset, '\n'));
}

std::string scalar_to_string(const ordered_json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw FormatError(where + " must be a string, number or boolean");
}

ParamList read_param_map(const ordered_json& record, const char* key, const std::string& label,
                         bool expand) {
  ParamList out;
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return out;
  if (!it->is_object()) throw FormatError(label + ": '" + key + "' must be an object");
  for (const auto& [name, value] : it->items()) {
    std::string s = scalar_to_string(value, label + ": " + key + "." + name);
    out.emplace_back(name, expand ? expand_env(s) : std::move(s));
  }
  return out;
}

ToolSpec read_tool(const ordered_json& record, std::size_t position) {
  const std::string label = "tool #" + std::to_string(position + 1);
  if (!record.is_object()) throw FormatError(label + " must be an object");

  static const std::set<std::string> kKnown = {
      "id", "name", "description", "method", "endpoint", "dynamic_params",
      "static_params", "headers", "post_encoding"};
  for (const auto& [key, value] : record.items()) {
    if (!kKnown.contains(key)) throw FormatError(label + ": unknown field '" + key + "'");
  }
  auto get_string = [&](const char* key, bool required) -> std::string {
    const auto it = record.find(key);
    if (it == record.end()) {
      if (required) throw FormatError(label + ": missing field '" + key + "'");
      return {};
    }
    if (!it->is_string()) throw FormatError(label + ": field '" + key + "' must be a string");
    return it->get<std::string>();
  };

  ToolSpec tool;
  tool.name = get_string("name", true);
  tool.description = get_string("description", true);
  tool.endpoint = expand_env(get_string("endpoint", true));

  const std::string method = text::to_lower(get_string("method", false));
  if (method.empty() || method == "get") {
    tool.method = HttpMethod::get;
  } else if (method == "post") {
    tool.method = HttpMethod::post;
  } else {
    throw Error(ErrorCode::validation, label + ": method must be GET or POST");
  }

  const std::string encoding = get_string("post_encoding", false);
  if (encoding.empty() || encoding == "json") {
    tool.post_encoding = PostEncoding::json;
  } else if (encoding == "form") {
    tool.post_encoding = PostEncoding::form;
  } else {
    throw Error(ErrorCode::validation, label + ": post_encoding must be json or form");
  }

  tool.dynamic_params = read_param_map(record, "dynamic_params", label, false);
  tool.static_params = read_param_map(record, "static_params", label, true);
  tool.headers = read_param_map(record, "headers", label, true);

  const auto id = record.find("id");
  if (id == record.end()) {
    tool.id = static_cast<int>(position + 1);
  } else if (id->is_number_integer()) {
    tool.id = id->get<int>();
  } else {
    throw FormatError(label + ": id must be an integer");
  }
  return tool;
}

std::string hex_byte(unsigned char c) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  return {'%', kHex[c >> 4], kHex[c & 0x0F]};
}

std::string join_query(const ParamList& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out.push_back('&');
    out += percent_encode(k);
    out.push_back('=');
    out += percent_encode(v);
  }
  return out;
}

}  // namespace

std::string expand_env(std::string_view value) {
  std::string out;
  std::size_t i = 0;
  while (i < value.size()) {
    if (value.compare(i, 2, "${") == 0) {
      const auto close = value.find('}', i + 2);
      if (close == std::string_view::npos) {
        throw Error(ErrorCode::validation, "unterminated ${ in '" + std::string(value) + "'");
      }
      const std::string name(value.substr(i + 2, close - i - 2));
      const char* resolved = std::getenv(name.c_str());
      if (name.empty() || resolved == nullptr) {
        throw Error(ErrorCode::validation, "environment variable '" + name + "' is not set");
      }
      out += resolved;
      i = close + 1;
    } else {
      out.push_back(value[i++]);
    }
  }
  return out;
}

std::vector<ToolSpec> load_registry(std::istream& in) {
  const std::string doc{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (text::trim(doc).empty()) return {};

  ordered_json root;
  try {
    root = ordered_json::parse(doc);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_of_offset(doc, e.byte));
  }

  const ordered_json* list = &root;
  if (root.is_object()) {
    const auto it = root.find("tools");
    if (it == root.end()) throw FormatError("expected a 'tools' array");
    list = &*it;
  }
  if (!list->is_array()) throw FormatError("'tools' must be an array");

  std::vector<ToolSpec> registry;
  for (std::size_t i = 0; i < list->size(); ++i) registry.push_back(read_tool((*list)[i], i));
  std::sort(registry.begin(), registry.end(),
            [](const ToolSpec& a, const ToolSpec& b) { return a.id < b.id; });
  validate_registry(registry);
  return registry;
}

std::string percent_encode(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (unsigned char c : value) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' ||
                            c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out += hex_byte(c);
    }
  }
  return out;
}

ParamList merged_params(const ToolSpec& spec, const ToolInput& input) {
  for (const auto& [k, v] : input.values) {
    if (!spec.declares(k)) {
      throw Error(ErrorCode::unknown_param,
                  "tool " + std::to_string(spec.id) + " has no dynamic parameter '" + k + "'");
    }
  }
  ParamList merged = spec.static_params;
  for (const auto& [name, description] : spec.dynamic_params) {
    const auto it = input.values.find(name);
    if (it != input.values.end()) merged.emplace_back(name, it->second);
  }
  return merged;
}

ToolRequest build_request(const ToolSpec& spec, const ToolInput& input) {
  const ParamList params = merged_params(spec, input);
  ToolRequest request;
  request.method = spec.method;
  request.headers = spec.headers;
  if (spec.method == HttpMethod::get) {
    request.url = spec.endpoint;
    if (!params.empty()) {
      request.url.push_back(spec.endpoint.find('?') == std::string::npos ? '?' : '&');
      request.url += join_query(params);
    }
    return request;
  }

  request.url = spec.endpoint;
  if (spec.post_encoding == PostEncoding::form) {
    request.body = join_query(params);
    request.content_type = "application/x-www-form-urlencoded";
  } else {
    ordered_json body = ordered_json::object();
    for (const auto& [k, v] : params) body[k] = v;
    request.body = body.dump();
    request.content_type = "application/json";
  }
  return request;
}

std::string HttpToolExecutor::execute(const ToolRequest& request, double timeout_seconds) {
  http::Request http_request;
  http_request.method = request.method;
  http_request.url = request.url;
  http_request.headers = request.headers;
  http_request.body = request.body.value_or("");
  http_request.content_type = request.content_type;
  const http::Response response = http::send(http_request, timeout_seconds);
  if (response.status < 200 || response.status >= 300) {
    throw TransportError("tool endpoint returned HTTP " + std::to_string(response.status),
                         response.status, text::sanitize_utf8(response.body.substr(0, 200)));
  }
  return text::sanitize_utf8(response.body);
}

std::string truncate(std::string_view body, std::size_t limit) {
  return std::string(body.substr(0, text::prefix_bytes(body, limit)));
}

}  // namespace rebel
