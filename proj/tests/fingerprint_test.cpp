#include <gtest/gtest.h>

#include "rfb/fingerprint.hpp"

namespace rfb {
namespace {

Fingerprint dense(std::initializer_list<std::uint32_t> counts) {
  Fingerprint fp;
  std::uint32_t f = 0;
  for (auto c : counts) {
    if (c) fp.entries.emplace_back(f, c);
    ++f;
  }
  return fp;
}

TEST(Fingerprint, CountsBigrams) {
  auto fp = fingerprint("aa");
  ASSERT_EQ(fp.entries.size(), 1u);
  EXPECT_EQ(fp.count(bigram_feature('a', 'a')), 1u);
  EXPECT_EQ(fingerprint("abab").count(bigram_feature('a', 'b')), 2u);
  EXPECT_EQ(fingerprint("abab").count(bigram_feature('b', 'a')), 1u);
  EXPECT_TRUE(fingerprint("a").entries.empty());
}

TEST(Fingerprint, ReactionCombinedAndDelta) {
  // Product fp {x:2}, reactants {x:1} each.
  const std::string reactants[] = {"ab", "ab"};
  auto rf = reaction_fingerprints("abxab", reactants);
  EXPECT_EQ(rf.combined.count(bigram_feature('a', 'b')), 4u);
  EXPECT_EQ(rf.delta.count(bigram_feature('a', 'b')), 0u);
  EXPECT_EQ(rf.delta.count(bigram_feature('b', 'x')), 1u);
  auto again = reaction_fingerprints("abxab", reactants);
  EXPECT_EQ(rf.combined, again.combined);
  EXPECT_EQ(rf.delta, again.delta);
}

TEST(Jaccard, ReferenceValues) {
  EXPECT_DOUBLE_EQ(jaccard(dense({1, 1, 0}), dense({1, 0, 1})), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard(dense({3, 2}), dense({3, 2})), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(dense({1, 0}), dense({0, 4})), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(Fingerprint{}, Fingerprint{}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(dense({2, 1}), dense({1, 3})), 2.0 / 5.0);
}

TEST(Jaccard, SymmetricAndBounded) {
  const char* words[] = {"abcab", "ccc", "abab", "a", "bcbcbca", "acbd"};
  for (const char* a : words) {
    for (const char* b : words) {
      const double j = jaccard(fingerprint(a), fingerprint(b));
      EXPECT_GE(j, 0.0);
      EXPECT_LE(j, 1.0);
      EXPECT_DOUBLE_EQ(j, jaccard(fingerprint(b), fingerprint(a)));
    }
  }
}

TEST(ReactionKernel, SelfSimilarityIsOne) {
  const std::string r1[] = {"abc", "ca"};
  const std::string r2[] = {"dd"};
  auto a = reaction_fingerprints("abcca", r1);
  auto b = reaction_fingerprints("ddd", r2);
  EXPECT_DOUBLE_EQ(reaction_kernel(a, a), 1.0);
  EXPECT_DOUBLE_EQ(reaction_kernel(a, b), reaction_kernel(b, a));
  EXPECT_LT(reaction_kernel(a, b), 1.0);
}

}  // namespace
}  // namespace rfb
