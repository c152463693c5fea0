#include <gtest/gtest.h>

#include "rebel/core.hpp"

using namespace rebel;

TEST(Question, BlankTextIsRejected) {
  EXPECT_THROW(Question::make("   "), Error);
  EXPECT_EQ(Question::make("Why?", 2).depth, 2);
}

TEST(Memory, AppendKeepsOrderAndRejectsEmptyParts) {
  Memory m;
  m.append({"q1", "a1"});
  m.append({"q2", "a2"});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.facts()[1], (Fact{"q2", "a2"}));
  EXPECT_THROW(m.append({"", "a"}), Error);
  EXPECT_THROW(m.append({"q", ""}), Error);
  EXPECT_EQ(m.size(), 2u);
}

TEST(Memory, PrefixRelation) {
  Memory a(std::vector<Fact>{{"q1", "a1"}});
  Memory b({{"q1", "a1"}, {"q2", "a2"}});
  Memory c(std::vector<Fact>{{"q2", "a2"}});
  EXPECT_TRUE(a.is_prefix_of(b));
  EXPECT_TRUE(Memory().is_prefix_of(a));
  EXPECT_FALSE(b.is_prefix_of(a));
  EXPECT_FALSE(c.is_prefix_of(b));
}

namespace {

ToolSpec tool(int id, std::string name) {
  ToolSpec t;
  t.id = id;
  t.name = std::move(name);
  t.description = "does things";
  t.endpoint = "https://api.example/" + t.name;
  t.dynamic_params = {{"q", "query"}};
  return t;
}

}  // namespace

TEST(Registry, AcceptsContiguousIds) {
  EXPECT_NO_THROW(validate_registry(std::vector<ToolSpec>{}));
  EXPECT_NO_THROW(validate_registry(std::vector{tool(1, "a"), tool(2, "b")}));
}

TEST(Registry, RejectsBadRegistries) {
  auto expect_invalid = [](std::vector<ToolSpec> r) {
    try {
      validate_registry(r);
      ADD_FAILURE() << "accepted an invalid registry";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::validation);
    }
  };
  expect_invalid({tool(1, "a"), tool(3, "b")});   // gap
  expect_invalid({tool(1, "a"), tool(1, "b")});   // duplicate id
  expect_invalid({tool(1, "a"), tool(2, "a")});   // duplicate name
  auto relative = tool(1, "a");
  relative.endpoint = "/search";
  expect_invalid({relative});
  auto overlap = tool(1, "a");
  overlap.static_params = {{"q", "fixed"}};
  expect_invalid({overlap});
}

TEST(Registry, FindTool) {
  const std::vector r{tool(1, "a"), tool(2, "b")};
  ASSERT_NE(find_tool(r, 2), nullptr);
  EXPECT_EQ(find_tool(r, 2)->name, "b");
  EXPECT_EQ(find_tool(r, 3), nullptr);
}

TEST(EngineConfig, DefaultsAreValid) {
  EngineConfig c;
  EXPECT_DOUBLE_EQ(c.similarity_threshold, 0.98);
  EXPECT_EQ(c.truncation_limit, 15000u);
  EXPECT_EQ(c.completion_budget, 64u);
  EXPECT_NO_THROW(c.validate());
  c.max_depth = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(TraceShape, RendersPathsToolsFallbacksAndPrunes) {
  TraceNode root;
  root.children.resize(2);
  root.children[0].path = NodePath::tool;
  root.children[0].tool_id = 1;
  root.children[0].pruned = {"x"};
  root.children[1].path = NodePath::tool;
  root.children[1].fallback = "transport";
  EXPECT_EQ(trace_shape(root), "memory(tool#1~1,tool!)");
  EXPECT_EQ(root.node_count(), 3u);
}
