#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "proxpg/rng.hpp"

using namespace proxpg;

TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, ReproducibleAndIndexSeparated) {
  RandomStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
}

TEST(RandomStream, UniformMomentsAndRange) {
  RandomStream rng(7, 3);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(RandomStream, BelowIsUnbiasedOverSmallRange) {
  RandomStream rng(11, 0);
  const int n = 120000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[rng.below(3)];
  for (int c : counts) {
    EXPECT_NEAR(c, n / 3.0, 4.0 * std::sqrt(n * (1.0 / 3) * (2.0 / 3)));
  }
}

TEST(StreamFactory, LabelsAndIndicesGiveDistinctKeys) {
  const StreamFactory root(5);
  std::set<std::uint64_t> keys;
  for (const char* label : {"outcomes", "branches", "output"}) {
    for (std::uint64_t i = 0; i < 50; ++i) keys.insert(root.child(label, i).key());
  }
  EXPECT_EQ(keys.size(), 150u);
  EXPECT_EQ(root.child("outcomes", 3).key(), StreamFactory(5).child("outcomes", 3).key());
  EXPECT_NE(StreamFactory(5).key(), StreamFactory(6).key());
}
