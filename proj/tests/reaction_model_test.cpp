#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>

#include "rfb/error.hpp"
#include "rfb/random.hpp"
#include "rfb/reaction_model.hpp"
#include "rfb/remote.hpp"

namespace rfb {
namespace {

WorldParams world(std::uint64_t seed) {
  WorldParams p;
  p.seed = seed;
  return p;
}

std::string random_molecule(rng::Stream& rs, int alphabet, int max_len) {
  const auto len = 1 + rs.below(static_cast<std::uint64_t>(max_len));
  std::string m;
  for (std::uint64_t i = 0; i < len; ++i) m += static_cast<char>('a' + rs.below(static_cast<std::uint64_t>(alphabet)));
  return m;
}

TEST(SyntheticWorld, ProposalsAreDeterministic) {
  SyntheticWorld a(world(42));
  SyntheticWorld b(world(42));
  const auto first = a.propose("abcd");
  EXPECT_EQ(first, a.propose("abcd"));
  EXPECT_EQ(first, b.propose("abcd"));
  EXPECT_EQ(a.call_count(), 1u);
}

TEST(SyntheticWorld, ProposalsFollowTheSplitOrRewriteRule) {
  SyntheticWorld w(world(7));
  rng::Stream rs(99);
  for (int i = 0; i < 300; ++i) {
    const auto m = random_molecule(rs, 6, 9);
    for (const auto& p : w.propose(m)) {
      ASSERT_FALSE(p.reactants.empty());
      for (const auto& r : p.reactants) EXPECT_NE(r, m);
      std::string joined;
      for (const auto& r : p.reactants) joined += r;
      if (p.reactants.size() == 1) {
        // One-character rewrite.
        ASSERT_EQ(joined.size(), m.size());
        int diff = 0;
        for (std::size_t c = 0; c < m.size(); ++c) diff += joined[c] != m[c];
        EXPECT_EQ(diff, 1);
      } else {
        EXPECT_EQ(joined, m);
      }
    }
  }
}

TEST(SyntheticWorld, BranchingIsBoundedAndScoresDecrease) {
  auto params = world(3);
  SyntheticWorld w(params);
  rng::Stream rs(5);
  std::size_t max_children = 0;
  std::size_t max_reactants = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_molecule(rs, params.alphabet_size, 12);
    const auto& props = w.propose(m);
    max_children = std::max(max_children, props.size());
    for (std::size_t j = 0; j < props.size(); ++j) {
      max_reactants = std::max(max_reactants, props[j].reactants.size());
      EXPECT_GT(props[j].score, 0.0);
      EXPECT_LE(props[j].score, 1.0);
      if (j) EXPECT_LT(props[j].score, props[j - 1].score);
    }
    EXPECT_NO_THROW(validate_proposals(m, props, params.max_children, params.max_reactants));
  }
  EXPECT_LE(max_children, static_cast<std::size_t>(params.max_children));
  EXPECT_LE(max_reactants, static_cast<std::size_t>(params.max_reactants));
  EXPECT_GT(max_children, 1u);
}

TEST(SyntheticWorld, ShortMoleculesSometimesDeadEnd) {
  SyntheticWorld w(world(11));
  int dead = 0;
  int total = 0;
  for (char a = 'a'; a < 'g'; ++a) {
    for (char b = 'a'; b < 'g'; ++b) {
      ++total;
      dead += w.propose(std::string{a, b}).empty();
    }
  }
  EXPECT_GT(dead, 0);
  EXPECT_LT(dead, total);
  EXPECT_TRUE(w.propose("a").empty());
}

TEST(SyntheticWorld, RejectsForeignSymbols) {
  SyntheticWorld w(world(1));
  try {
    w.propose("abz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
  EXPECT_THROW(w.propose(""), Error);
}

TEST(SyntheticWorld, TiersAndTargets) {
  SyntheticWorld w(world(5));
  EXPECT_TRUE(w.tier("a").has_value());
  EXPECT_FALSE(w.tier("abcdef").has_value());
  auto targets = w.generate_targets(20, 6, 9);
  ASSERT_EQ(targets.size(), 20u);
  EXPECT_EQ(targets, w.generate_targets(20, 6, 9));
  std::set<std::string> unique(targets.begin(), targets.end());
  EXPECT_EQ(unique.size(), targets.size());
  for (const auto& t : targets) {
    EXPECT_FALSE(w.tier(t));
    EXPECT_FALSE(w.propose(t).empty());
  }
}

// Exhaustive expansion of the molecules reachable from a target.
std::size_t exhaust(SyntheticWorld& w, const std::string& target, std::size_t limit) {
  std::set<std::string> seen{target};
  std::deque<std::string> queue{target};
  std::size_t expansions = 0;
  while (!queue.empty() && expansions < limit) {
    auto m = queue.front();
    queue.pop_front();
    ++expansions;
    for (const auto& p : w.propose(m)) {
      for (const auto& r : p.reactants) {
        if (seen.insert(r).second) queue.push_back(r);
      }
    }
  }
  return queue.empty() ? expansions : limit + 1;
}

TEST(SyntheticWorld, SomeTargetsHaveFiniteSearchSpaces) {
  int finite = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SyntheticWorld w(world(seed));
    const auto target = w.generate_targets(1, 4, 8).front();
    if (exhaust(w, target, 10000) <= 10000) ++finite;
  }
  EXPECT_GE(finite, 1);
}

TEST(BackwardModel, CallCountCountsDistinctMolecules) {
  SyntheticWorld w(world(2));
  w.propose("abc");
  w.propose("abc");
  w.propose("abd");
  EXPECT_EQ(w.call_count(), 2u);
}

TEST(ValidateProposals, RejectsBadLists) {
  EXPECT_THROW(validate_proposals("ab", {{{"ab"}, 0.5}}), Error);
  EXPECT_THROW(validate_proposals("ab", {{{}, 0.5}}), Error);
  EXPECT_THROW(validate_proposals("ab", {{{"a"}, 0.2}, {{"b"}, 0.5}}), Error);
  EXPECT_THROW(validate_proposals("ab", {{{"a"}, 1.5}}), Error);
  EXPECT_THROW(validate_proposals("ab", {{{"a"}, 0.5}, {{"b"}, 0.4}}, 1), Error);
  EXPECT_NO_THROW(validate_proposals("ab", {{{"a", "b"}, 0.5}, {{"b"}, 0.5}}));
}

const char* kRules = R"({"rules": [
  {"product": "ab", "reactants": ["a", "b"], "score": 0.9},
  {"product": "*ab", "reactants": ["*a", "b"], "score": 0.7},
  {"product": "c*", "reactants": ["*", "c"], "score": 0.8},
  {"product": "*", "reactants": ["*x"], "score": 0.1}
]})";

TEST(RuleSet, AppliesMatchingRulesInScoreOrder) {
  auto rules = RuleSet::from_json(kRules);
  auto ab = rules.apply("ab");
  ASSERT_EQ(ab.size(), 2u);
  EXPECT_EQ(ab[0].reactants, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ab[1].reactants, (std::vector<std::string>{"abx"}));
  auto cab = rules.apply("cab");
  ASSERT_EQ(cab.size(), 3u);
  EXPECT_EQ(cab[0].reactants, (std::vector<std::string>{"ab", "c"}));
  EXPECT_EQ(cab[1].reactants, (std::vector<std::string>{"ca", "b"}));
  EXPECT_EQ(cab[2].reactants, (std::vector<std::string>{"cabx"}));
  EXPECT_TRUE(RuleSet::from_json(R"({"rules": []})").apply("zz").empty());
}

TEST(RuleSet, RejectsMalformedFiles) {
  EXPECT_THROW(RuleSet::from_json("{"), Error);
  EXPECT_THROW(RuleSet::from_json(R"({"rules": [{"product": "**", "reactants": ["a"], "score": 0.5}]})"), Error);
  EXPECT_THROW(RuleSet::from_json(R"({"rules": [{"product": "a", "reactants": ["b"], "score": 2}]})"), Error);
  EXPECT_THROW(RuleSet::load("/nonexistent/rules.json"), Error);
}

TEST(Protocol, EncodesAndDecodes) {
  EXPECT_EQ(encode_request(7, "zz"), R"({"id":7,"molecule":"zz"})");
  EXPECT_EQ(encode_response(7, {}), R"({"id":7,"reactions":[]})");
  std::vector<Proposal> props{{{"a", "b"}, 0.5}};
  auto back = decode_response(encode_response(3, props));
  EXPECT_EQ(back.id, 3);
  EXPECT_EQ(back.reactions, props);
}

TEST(Protocol, MalformedLinesRaiseProtocolErrors) {
  const char* bad[] = {"", "nope", "[]", R"({"id":"x","reactions":[]})", R"({"id":1})",
                       R"({"id":1,"reactions":[{"reactants":"a","score":0.5}]})",
                       R"({"id":1,"reactions":[{"reactants":[1],"score":0.5}]})", R"({"id":null,"error":"bad"})"};
  for (const char* line : bad) {
    try {
      decode_response(line);
      FAIL() << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::protocol) << line;
    }
  }
}

TEST(Protocol, SurvivesRandomInput) {
  rng::Stream rs(17);
  const std::string alphabet = "{}[]\":,0123456789.-abcdeilnorstu \\";
  const std::string valid = R"({"id":1,"reactions":[{"reactants":["a"],"score":0.5}]})";
  for (int i = 0; i < 10000; ++i) {
    std::string line;
    if (rs.below(2)) {
      line = valid;
      for (int e = 0, n = 1 + static_cast<int>(rs.below(4)); e < n; ++e) {
        line[rs.below(line.size())] = alphabet[rs.below(alphabet.size())];
      }
    } else {
      for (std::uint64_t c = 0, n = rs.below(60); c < n; ++c) line += alphabet[rs.below(alphabet.size())];
    }
    try {
      decode_response(line);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::protocol);
    }
  }
}

class RemoteModelTest : public ::testing::Test {
 protected:
  void SetUp() override {
    rules_path_ = std::filesystem::temp_directory_path() / ("rfb_rules_" + std::to_string(::getpid()) + ".json");
    std::ofstream(rules_path_) << kRules;
  }
  void TearDown() override { std::filesystem::remove(rules_path_); }

  RemoteModel connect(const std::string& mode, std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
    return RemoteModel(std::make_unique<ProcessChannel>(
                           std::vector<std::string>{FAKE_SERVER, "--rules", rules_path_.string(), "--mode", mode}),
                       timeout);
  }

  std::filesystem::path rules_path_;
};

TEST_F(RemoteModelTest, MatchesInProcessRuleEngineOnCorpus) {
  auto remote = connect("normal");
  auto rules = RuleSet::load(rules_path_.string());
  rng::Stream rs(23);
  std::set<std::string> corpus{"ab", "cab", "zz"};
  while (corpus.size() < 50) corpus.insert(random_molecule(rs, 4, 6));
  for (const auto& m : corpus) EXPECT_EQ(remote.propose(m), rules.apply(m)) << m;
  EXPECT_EQ(remote.call_count(), 50u);
  EXPECT_EQ(remote.last_id(), 50);
}

TEST_F(RemoteModelTest, TerminalMoleculeGivesEmptyList) {
  auto remote = connect("normal");
  EXPECT_TRUE(RemoteModel(std::make_unique<ProcessChannel>(std::vector<std::string>{FAKE_SERVER}))
                  .propose("zz")
                  .empty());
  EXPECT_FALSE(remote.propose("ab").empty());
}

TEST_F(RemoteModelTest, StaleResponsesAreSkipped) {
  auto remote = connect("stale");
  EXPECT_EQ(remote.propose("ab").size(), 2u);
  EXPECT_EQ(remote.propose("cab").size(), 3u);
}

TEST_F(RemoteModelTest, Failures) {
  auto expect_kind = [](RemoteModel model, ErrorKind kind) {
    try {
      model.propose("ab");
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), kind) << e.what();
    }
  };
  expect_kind(connect("garbage"), ErrorKind::protocol);
  expect_kind(connect("wrong-id"), ErrorKind::protocol);
  expect_kind(connect("error"), ErrorKind::protocol);
  expect_kind(connect("unsorted"), ErrorKind::protocol);
  expect_kind(connect("self"), ErrorKind::rejected_proposal);
  expect_kind(connect("sleep", std::chrono::milliseconds(200)), ErrorKind::timeout);
}

TEST(RemoteModel, DeadServerIsAnError) {
  RemoteModel model(std::make_unique<ProcessChannel>(std::vector<std::string>{"/bin/true"}),
                    std::chrono::seconds(5));
  EXPECT_THROW(model.propose("ab"), Error);
}

}  // namespace
}  // namespace rfb
