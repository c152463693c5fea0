#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "../support.hpp"
#include "../url_oracle.hpp"
#include "rebel/prompting.hpp"
#include "rebel/stub_server.hpp"
#include "rebel/text.hpp"
#include "rebel/tools.hpp"

using namespace rebel;
using namespace rebel::testing;

namespace {

std::vector<ToolSpec> registry_from(const std::string& doc) {
  std::istringstream in(doc);
  return load_registry(in);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::precondition;
}

}  // namespace

TEST(PercentEncode, MatchesCurlOverAllBytes) {
  for (int c = 0; c < 256; ++c) {
    const std::string s(1, static_cast<char>(c));
    EXPECT_EQ(percent_encode(s), curl_escape(s)) << "byte " << c;
  }
}

TEST(BuildRequest, UrlGoldensAreByteExact) {
  const auto goldens = load_url_goldens(read_file(fixture("url_goldens.json")));
  ASSERT_GE(goldens.size(), 10u);
  for (const auto& g : goldens) {
    const ToolRequest req = build_request(g.tool, g.input);
    EXPECT_EQ(req.url, g.url) << g.name;
    EXPECT_EQ(oracle_url(g), g.url) << g.name;
    EXPECT_TRUE(same_multiset(decode_query(req.url), expected_pairs(g))) << g.name;
    EXPECT_FALSE(req.body.has_value());
  }
}

TEST(BuildRequest, UndeclaredInputKeyIsRejected) {
  const auto goldens = load_url_goldens(read_file(fixture("url_goldens.json")));
  ToolInput input{{{"origins", "A"}, {"via", "B"}}};
  EXPECT_EQ(code_of([&] { build_request(goldens.front().tool, input); }), ErrorCode::unknown_param);
}

TEST(BuildRequest, PostJsonAndForm) {
  auto registry = registry_from(R"({"tools": [
    {"name": "j", "description": "d", "method": "POST", "endpoint": "https://p.example/j",
     "dynamic_params": {"q": "x"}, "static_params": {"key": "s", "n": 3},
     "headers": {"X-Api-Key": "h"}},
    {"name": "f", "description": "d", "method": "post", "post_encoding": "form",
     "endpoint": "https://p.example/f", "dynamic_params": {"q": "x"}}]})");
  const auto json_req = build_request(registry[0], ToolInput{{{"q", "a \"b\""}}});
  EXPECT_EQ(json_req.method, HttpMethod::post);
  EXPECT_EQ(json_req.url, "https://p.example/j");
  EXPECT_EQ(*json_req.body, R"({"key":"s","n":"3","q":"a \"b\""})");
  EXPECT_EQ(json_req.content_type, "application/json");
  EXPECT_EQ(json_req.headers, (ParamList{{"X-Api-Key", "h"}}));

  const auto form_req = build_request(registry[1], ToolInput{{{"q", "a b&c"}}});
  EXPECT_EQ(*form_req.body, "q=a%20b%26c");
  EXPECT_EQ(form_req.content_type, "application/x-www-form-urlencoded");
}

TEST(LoadRegistry, IdsDefaultToPositionAndSort) {
  auto r = registry_from(R"([{"name": "b", "description": "B", "endpoint": "https://x.example/b", "id": 2},
                             {"name": "a", "description": "A", "endpoint": "https://x.example/a", "id": 1}])");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].name, "a");
  EXPECT_TRUE(registry_from("").empty());
  EXPECT_TRUE(registry_from(R"({"tools": []})").empty());
}

TEST(LoadRegistry, RejectsMalformedDocuments) {
  EXPECT_EQ(code_of([] { registry_from("{"); }), ErrorCode::format);
  EXPECT_EQ(code_of([] {
              registry_from(R"([{"name": "a", "description": "A", "endpoint": "https://x.example", "secret": 1}])");
            }),
            ErrorCode::format);
  EXPECT_EQ(code_of([] { registry_from(R"([{"name": "a", "endpoint": "https://x.example"}])"); }),
            ErrorCode::format);
  EXPECT_EQ(code_of([] {
              registry_from(R"([{"name": "a", "description": "A", "endpoint": "ftp://x.example"}])");
            }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] {
              registry_from(R"([{"name": "a", "description": "A", "endpoint": "https://x.example", "method": "PUT"}])");
            }),
            ErrorCode::validation);
}

TEST(LoadRegistry, FormatErrorsCarryTheLine) {
  try {
    registry_from("{\n  \"tools\": [\n    {,}\n  ]\n}");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ExpandEnv, SubstitutesAndRejectsUnset) {
  ScopedEnv env("REBEL_TEST_TOKEN", "t0k");
  EXPECT_EQ(expand_env("a${REBEL_TEST_TOKEN}b"), "at0kb");
  EXPECT_EQ(expand_env("plain $HOME"), "plain $HOME");
  ::unsetenv("REBEL_TEST_UNSET_VAR");
  EXPECT_EQ(code_of([] { expand_env("${REBEL_TEST_UNSET_VAR}"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { expand_env("${OPEN"); }), ErrorCode::validation);
}

TEST(Secrecy, StaticValuesAndEndpointsNeverReachPrompts) {
  ScopedEnv env("REBEL_TEST_SECRET", "sk-very-secret-42");
  auto registry = registry_from(R"({"tools": [
    {"name": "search", "description": "Look things up.", "endpoint": "https://hidden-host.example/s",
     "dynamic_params": {"q": "query"}, "static_params": {"apikey": "${REBEL_TEST_SECRET}"},
     "headers": {"Authorization": "Bearer ${REBEL_TEST_SECRET}"}}]})");
  const auto q = Question::make("Who wrote Hamlet?");
  Memory memory(std::vector<Fact>{{"Where?", "Here"}});
  const PromptSet& p = PromptSet::defaults();
  const std::vector<std::string> prompts = {
      render_split_prompt(registry, q, memory, 4, p),
      render_tool_pick_prompt(registry, q, memory, p),
      render_tool_input_prompt(registry[0], q, memory, 2, p),
      render_tool_list(registry),
  };
  for (const auto& prompt : prompts) {
    EXPECT_EQ(prompt.find("sk-very-secret-42"), std::string::npos);
    EXPECT_EQ(prompt.find("hidden-host"), std::string::npos);
    EXPECT_EQ(prompt.find("apikey"), std::string::npos);
    EXPECT_EQ(prompt.find("Authorization"), std::string::npos);
  }
}

TEST(Truncate, KeepsWholeCodePoints) {
  EXPECT_EQ(rebel::truncate("hello", 3), "hel");
  EXPECT_EQ(rebel::truncate("hello", 5), "hello");
  EXPECT_EQ(rebel::truncate("hello", 50), "hello");
  EXPECT_EQ(rebel::truncate("", 5), "");
  EXPECT_EQ(rebel::truncate("a€b", 2), "a€");
  EXPECT_EQ(rebel::truncate("😀😀", 1), "😀");
}

TEST(Truncate, PropertiesOnRandomUnicode) {
  std::mt19937 rng(11);
  const std::vector<std::string> alphabet = {"a", "Z", " ", "é", "€", "😀", "\n"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<std::size_t> len(0, 300);
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    for (std::size_t i = len(rng); i > 0; --i) s += alphabet[pick(rng)];
    const std::size_t limit = len(rng);
    const std::string t = rebel::truncate(s, limit);
    EXPECT_LE(text::count_code_points(t), limit);
    EXPECT_EQ(s.compare(0, t.size(), t), 0);
    EXPECT_EQ(rebel::truncate(t, limit), t);
    EXPECT_EQ(text::sanitize_utf8(t), t);
    if (text::count_code_points(s) >= limit) EXPECT_EQ(text::count_code_points(t), limit);
  }
}

class StubServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::istringstream routes(R"({"routes": [
      {"target": "/weather?location=Portland", "response": "Portland: 14 C"},
      {"target": "/big", "response": "0123456789", "repeat": 2000},
      {"method": "POST", "target": "/echo", "request_body": "{\"q\":\"x\"}", "response": "posted"},
      {"target": "/slow", "response": "late", "delay_seconds": 2.0},
      {"target": "/broken", "status": 500, "response": "internal failure"}]})");
    server_ = std::make_unique<StubToolServer>(load_stub_routes(routes));
    server_->start();
  }
  void TearDown() override { server_->stop(); }

  ToolRequest get(const std::string& target) {
    ToolRequest r;
    r.url = server_->base_url() + target;
    return r;
  }

  std::unique_ptr<StubToolServer> server_;
  HttpToolExecutor executor_;
};

TEST_F(StubServerTest, ServesMatchingRoute) {
  EXPECT_EQ(executor_.execute(get("/weather?location=Portland"), 5), "Portland: 14 C");
  EXPECT_EQ(server_->requests(), (std::vector<std::string>{"GET /weather?location=Portland"}));
}

TEST_F(StubServerTest, UnmatchedTargetIs404TransportError) {
  try {
    executor_.execute(get("/weather?location=Oslo"), 5);
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST_F(StubServerTest, ServerErrorCarriesStatusAndBodyPrefix) {
  try {
    executor_.execute(get("/broken"), 5);
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 500);
    EXPECT_EQ(e.body_prefix(), "internal failure");
  }
}

TEST_F(StubServerTest, LargeBodyArrivesWholeAndTruncatesTo15000) {
  const std::string body = executor_.execute(get("/big"), 5);
  EXPECT_EQ(body.size(), 20000u);
  EXPECT_EQ(rebel::truncate(body, 15000).size(), 15000u);
}

TEST_F(StubServerTest, PostBodyMustMatch) {
  ToolRequest r;
  r.method = HttpMethod::post;
  r.url = server_->base_url() + "/echo";
  r.body = R"({"q":"x"})";
  r.content_type = "application/json";
  EXPECT_EQ(executor_.execute(r, 5), "posted");
  r.body = R"({"q":"y"})";
  EXPECT_THROW(executor_.execute(r, 5), TransportError);
}

TEST_F(StubServerTest, SlowResponseTimesOut) {
  EXPECT_EQ(code_of([&] { executor_.execute(get("/slow"), 0.3); }), ErrorCode::timeout);
}

TEST(HttpToolExecutor, RefusedConnectionIsTransportError) {
  ToolRequest r;
  r.url = "http://127.0.0.1:1/nothing";
  EXPECT_EQ(code_of([&] { HttpToolExecutor().execute(r, 2); }), ErrorCode::transport);
}
