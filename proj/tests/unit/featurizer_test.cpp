#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <httplib.h>

#include "../support.hpp"
#include "rebel/featurizer.hpp"
#include "rebel/text.hpp"

using namespace rebel;

TEST(Fnv1a64, PublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(TrigramFeaturizer, VectorForAbcdHasTwoEqualBuckets) {
  const auto v = TrigramFeaturizer().featurize("ABcd");
  ASSERT_EQ(v.dimension(), TrigramFeaturizer::kDimension);
  const std::size_t b1 = fnv1a64("abc") % 4096;
  const std::size_t b2 = fnv1a64("bcd") % 4096;
  ASSERT_NE(b1, b2);
  for (std::size_t i = 0; i < v.dimension(); ++i) {
    const double expected = (i == b1 || i == b2) ? 1.0 / std::sqrt(2.0) : 0.0;
    EXPECT_DOUBLE_EQ(v.values[i], expected) << "bucket " << i;
  }
}

TEST(TrigramFeaturizer, ShortTextIsOneGram) {
  const auto v = TrigramFeaturizer().featurize("Hi");
  EXPECT_DOUBLE_EQ(v.values[fnv1a64("hi") % 4096], 1.0);
}

TEST(TrigramFeaturizer, MultiByteCharactersCountOnce) {
  // Three code points, five bytes: exactly one trigram.
  const auto v = TrigramFeaturizer().featurize("\xC3\xA9t\xC3\xA9");
  EXPECT_DOUBLE_EQ(v.values[fnv1a64("\xC3\xA9t\xC3\xA9") % 4096], 1.0);
}

TEST(TrigramFeaturizer, EmptyTextIsRejected) {
  try {
    TrigramFeaturizer().featurize("  ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_text);
  }
}

TEST(Cosine, HandComputedValues) {
  EXPECT_DOUBLE_EQ(cosine_similarity({{1, 0}}, {{0, 1}}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity({{2, 0}}, {{5, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity({{1, 0}}, {{-1, 0}}), -1.0);
  // 32 / sqrt(14 * 77)
  EXPECT_NEAR(cosine_similarity({{1, 2, 3}}, {{4, 5, 6}}), 0.9746318461970762, 1e-15);
}

TEST(Cosine, ErrorsOnBadInput) {
  try {
    cosine_similarity({{1, 2}}, {{1, 2, 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
  try {
    cosine_similarity({{0, 0}}, {{1, 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_vector);
  }
}

TEST(TrigramFeaturizer, AbcdVersusAbceSharesHalf) {
  const TrigramFeaturizer f;
  ASSERT_NE(fnv1a64("bcd") % 4096, fnv1a64("bce") % 4096);
  EXPECT_NEAR(cosine_similarity(f.featurize("abcd"), f.featurize("abce")), 0.5, 1e-12);
}

TEST(TrigramFeaturizer, PropertiesOverRandomStrings) {
  const TrigramFeaturizer f;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_int_distribution<int> ch(32, 126);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a;
    std::string b;
    for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>(ch(rng)));
    for (int i = len(rng); i > 0; --i) b.push_back(static_cast<char>(ch(rng)));
    if (text::trim(a).empty() || text::trim(b).empty()) continue;
    const auto va = f.featurize(a);
    const auto vb = f.featurize(b);
    double norm = 0;
    for (double x : va.values) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    EXPECT_NEAR(cosine_similarity(va, va), 1.0, 1e-12);
    const double ab = cosine_similarity(va, vb);
    EXPECT_DOUBLE_EQ(ab, cosine_similarity(vb, va));
    EXPECT_GE(ab, 0.0);  // counts are non-negative
    EXPECT_LE(ab, 1.0 + 1e-12);
  }
}

TEST(RemoteFeaturizer, ReadsVectorFromConfiguredPointer) {
  httplib::Server server;
  std::string seen_body;
  std::string seen_auth;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    seen_auth = req.get_header_value("Authorization");
    res.set_content(R"({"data":[{"embedding":[0.5,0.25,1]}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  rebel::testing::ScopedEnv key("REBEL_TEST_EMBED_KEY", "k123");
  RemoteEmbeddingConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/embed";
  cfg.api_key_env = "REBEL_TEST_EMBED_KEY";
  cfg.model = "m1";
  const auto v = RemoteFeaturizer(cfg).featurize("hello");
  server.stop();
  t.join();

  EXPECT_EQ(v.values, (std::vector<double>{0.5, 0.25, 1.0}));
  EXPECT_EQ(seen_body, R"({"model":"m1","input":"hello"})");
  EXPECT_EQ(seen_auth, "Bearer k123");
}
