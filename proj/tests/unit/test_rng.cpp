#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <amgan/rng.hpp>

using namespace amgan;

// Reference blocks produced by an independent Philox4x64-10 implementation
// (numpy.random.Philox).
TEST(Philox, KnownAnswers) {
  const auto a = Philox4x64::block({1, 0, 0, 0}, {0, 0});
  EXPECT_EQ(a[0], 0x02f4ba6408e4d89bULL);
  EXPECT_EQ(a[1], 0x3dd62b0b9ca8c5b2ULL);
  EXPECT_EQ(a[2], 0x1c8667a55d902e79ULL);
  EXPECT_EQ(a[3], 0x907d7a052fd5b4dcULL);

  const auto b = Philox4x64::block({2, 0, 0, 0}, {0, 0});
  EXPECT_EQ(b[0], 0x809bf322883987c3ULL);
  EXPECT_EQ(b[1], 0x471128b9e807f7ddULL);
  EXPECT_EQ(b[2], 0xf250ba0dbec065b7ULL);
  EXPECT_EQ(b[3], 0xfc6ed66767a457bcULL);

  const auto c = Philox4x64::block({0, 1, 0, 0}, {0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL});
  EXPECT_EQ(c[0], 0x182646188eb8c971ULL);
  EXPECT_EQ(c[1], 0xf4fe9b62c1216bb4ULL);
  EXPECT_EQ(c[2], 0xb9f75f0ea83ba376ULL);
  EXPECT_EQ(c[3], 0x0dee2f0af3dadedcULL);
}

TEST(PurposeId, Fnv1a) {
  static_assert(purpose_id("") == 0xcbf29ce484222325ULL);
  static_assert(purpose_id("a") == 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(purpose_id("data"), purpose_id("eval"));
}

TEST(RandomStream, ReproducibleAndAddressed) {
  RandomStream a(42, "data", 3, 1), b(42, "data", 3, 1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s : {0ULL, 1ULL}) {
    for (const char* p : {"data", "eval"}) {
      for (std::uint64_t x : {0ULL, 1ULL}) {
        for (std::uint64_t y : {0ULL, 1ULL}) firsts.insert(RandomStream(s, p, x, y).next_u64());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 16u);
}

TEST(RandomStream, UniformAndNormalMoments) {
  RandomStream rng(1, "moments");
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  // 5 standard errors.
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(RandomStream, BelowIsUnbiased) {
  RandomStream rng(1, "below");
  const std::uint64_t k = 7;
  std::vector<int> counts(k, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.below(k);
    ASSERT_LT(v, k);
    ++counts[v];
  }
  const double p = 1.0 / k;
  for (int c : counts) EXPECT_NEAR(c, n * p, 5 * std::sqrt(n * p * (1 - p)));
  EXPECT_EQ(rng.below(1), 0u);
}
