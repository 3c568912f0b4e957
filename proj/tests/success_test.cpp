#include <gtest/gtest.h>

#include <cmath>

#include "rfb/error.hpp"
#include "rfb/random.hpp"
#include "rfb/success.hpp"
#include "support/fixtures.hpp"

namespace rfb {
namespace {

using testing::worked_example;

SynthesisPlan plan_of(const testing::Fixture& fx, std::initializer_list<const char*> names) {
  SynthesisPlan p{0, {}};
  for (const char* n : names) p.nodes.push_back(fx[n]);
  std::sort(p.nodes.begin(), p.nodes.end());
  return p;
}

TEST(PlanSuccess, Cases) {
  auto fx = worked_example();
  EXPECT_FALSE(plan_success(fx.graph, plan_of(fx, {"m*", "r5", "mg", "mh"}), fx.outcome));
  SynthesisPlan single{fx["mc"], {fx["mc"]}};
  EXPECT_TRUE(plan_success(fx.graph, single, fx.outcome));
  auto all = fx.outcome;
  for (NodeId n = 0; n < all.size(); ++n) {
    if (fx.graph.node(n).is_molecule()) all[n] = 1;
  }
  all[fx["r1"]] = 0;
  EXPECT_FALSE(plan_success(fx.graph, plan_of(fx, {"m*", "r1", "ma", "mb"}), all));
  EXPECT_TRUE(plan_success(fx.graph, plan_of(fx, {"m*", "r5", "mg", "mh"}), all));
}

TEST(ComputeS, WorkedExample) {
  auto fx = worked_example();
  auto s = compute_s(fx.graph, fx.outcome);
  for (const auto& [name, id] : fx.id) {
    const bool want = name == "mc" || name == "me" || name == "mh";
    EXPECT_EQ(s[id], want ? 1 : 0) << name;
  }
}

TEST(ComputeS, AllBuyable) {
  auto fx = worked_example();
  auto out = fx.outcome;
  for (NodeId n = 0; n < out.size(); ++n) {
    if (fx.graph.node(n).is_molecule()) out[n] = 1;
  }
  auto s = compute_s(fx.graph, out);
  for (NodeId n = 0; n < out.size(); ++n) {
    EXPECT_EQ(s[n], fx.graph.node(n).is_molecule() ? 1 : out[n]);
  }
}

TEST(ComputeS, FeasibleCycleWithoutPurchasesFails) {
  AndOrGraph g("A");
  std::vector<Proposal> to_b{{{"B"}, 0.5}};
  std::vector<Proposal> to_a{{{"A"}, 0.5}};
  g.expand(0, to_b);
  g.expand(2, to_a);
  std::vector<std::uint8_t> out{0, 1, 0, 1};
  EXPECT_EQ(compute_s(g, out), (std::vector<std::uint8_t>{0, 0, 0, 0}));
  out[2] = 1;
  EXPECT_EQ(compute_s(g, out), (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

// s(root) = 1 iff some enumerated plan succeeds.
TEST(ComputeS, AgreesWithPlanEnumeration) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto fx = seed % 2 ? testing::random_graph(seed, 12) : testing::random_tree(seed, 12);
    rng::Stream rs(seed);
    auto plans = enumerate_plans(fx.graph, 0, 100000);
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<std::uint8_t> out(fx.graph.size());
      for (auto& o : out) o = rs.uniform() < 0.5;
      bool any = false;
      for (const auto& p : plans) any = any || plan_success(fx.graph, p, out);
      EXPECT_EQ(compute_s(fx.graph, out)[0] == 1, any) << seed;
    }
  }
}

ScenarioMatrix random_matrix(const AndOrGraph& g, std::size_t k, std::uint64_t seed) {
  ScenarioMatrix m(k, seed);
  IndependentFeasibility f(constant_marginal(0.6));
  IndependentBuyability b(constant_marginal(0.3));
  cover(m, g, f, b);
  return m;
}

TEST(SuccessTracker, MatchesReferenceAndIsIncremental) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto fx = testing::random_graph(seed, 30);
    const std::size_t k = 100;
    auto m = random_matrix(fx.graph, k, seed);
    SuccessTracker tracker(k);
    tracker.update(fx.graph, m);
    for (std::size_t j = 0; j < k; ++j) {
      auto s = compute_s(fx.graph, m.column(j, fx.graph.size()));
      for (NodeId n = 0; n < fx.graph.size(); ++n) ASSERT_EQ(tracker.value(n, j), s[n] == 1);
    }
  }
}

TEST(SuccessTracker, NeverDecreasesAsTheGraphGrows) {
  IndependentFeasibility f(constant_marginal(0.7));
  IndependentBuyability b(constant_marginal(0.3));
  rng::Stream rs(77);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AndOrGraph g("m0");
    ScenarioMatrix m(64, seed);
    cover(m, g, f, b);
    SuccessTracker tracker(64);
    tracker.update(g, m);
    double previous = tracker.ssp();
    std::vector<std::uint64_t> prev_bits(tracker.bits(0).begin(), tracker.bits(0).end());
    for (int step = 0; step < 15 && g.frontier_size() > 0; ++step) {
      const NodeId pick = g.frontier()[rs.below(g.frontier_size())];
      std::vector<Proposal> props;
      for (std::uint64_t i = 0, n = rs.below(3); i < n; ++i) {
        Proposal p{{}, 0.5};
        for (std::uint64_t r = 0, nr = 1 + rs.below(2); r < nr; ++r) {
          auto name = "m" + std::to_string(rs.below(8));
          if (name != g.node(pick).molecule) p.reactants.push_back(name);
        }
        if (!p.reactants.empty()) props.push_back(p);
      }
      auto added = g.expand(pick, props);
      extend(m, g, added, f, b);
      tracker.update(g, m);
      for (std::size_t w = 0; w < prev_bits.size(); ++w) EXPECT_EQ(prev_bits[w] & ~tracker.bits(0)[w], 0u);
      prev_bits.assign(tracker.bits(0).begin(), tracker.bits(0).end());
      EXPECT_GE(tracker.ssp(), previous);
      previous = tracker.ssp();
      // Scratch recomputation agrees with the incremental state.
      SuccessTracker fresh(64);
      fresh.update(g, m);
      for (NodeId n = 0; n < g.size(); ++n) {
        ASSERT_TRUE(std::equal(fresh.bits(n).begin(), fresh.bits(n).end(), tracker.bits(n).begin()));
      }
    }
  }
}

// Target with two disjoint single-reaction plans to buyable leaves.
AndOrGraph two_plans() {
  AndOrGraph g("t");
  std::vector<Proposal> props{{{"a"}, 0.9}, {{"b"}, 0.8}};
  g.expand(0, props);
  return g;
}

TEST(EstimateSsp, BuyableTargetAndWorkedExample) {
  AndOrGraph g("t");
  ScenarioMatrix m(50, 1);
  IndependentFeasibility f(constant_marginal(0.5));
  IndependentBuyability b(constant_marginal(1.0));
  cover(m, g, f, b);
  EXPECT_EQ(estimate_ssp(g, m), 1.0);

  auto fx = worked_example();
  ScenarioMatrix one(1, 0);
  for (NodeId n = 0; n < fx.graph.size(); ++n) one.set_outcomes(n, std::vector<std::uint8_t>{fx.outcome[n]});
  EXPECT_EQ(estimate_ssp(fx.graph, one), 0.0);
}

TEST(EstimateSsp, TwoIndependentPlans) {
  auto g = two_plans();
  const std::size_t k = 10000;
  ScenarioMatrix m(k, 21);
  IndependentFeasibility f(constant_marginal(0.5));
  IndependentBuyability b([](const AndOrGraph& gr, NodeId n) { return n == gr.root() ? 0.0 : 1.0; });
  cover(m, g, f, b);
  EXPECT_NEAR(estimate_ssp(g, m), 0.75, 0.015);
}

TEST(ExactSsp, SmallCases) {
  AndOrGraph chain("t");
  std::vector<Proposal> one{{{"a"}, 0.9}};
  chain.expand(0, one);
  EXPECT_DOUBLE_EQ(exact_ssp_independent(chain, std::vector<double>{0.0, 0.5, 1.0}), 0.5);
  auto g = two_plans();
  EXPECT_DOUBLE_EQ(exact_ssp_independent(g, std::vector<double>{0.0, 0.5, 1.0, 0.5, 1.0}), 0.75);
}

TEST(ExactSsp, DivergenceExampleMatchesClosedForm) {
  // target -> r1 -> m1; m1 -> r2 -> m2; m1 -> r3 -> m3; target -> r4 -> m4.
  AndOrGraph g("t");
  std::vector<Proposal> top{{{"m1"}, 0.9}, {{"m4"}, 0.8}};
  g.expand(0, top);
  std::vector<Proposal> mid{{{"m2"}, 0.9}, {{"m3"}, 0.8}};
  g.expand(*g.find_molecule("m1"), mid);
  const NodeId r1 = g.children(0)[0], r4 = g.children(0)[1];
  const NodeId m1 = *g.find_molecule("m1");
  const NodeId r2 = g.children(m1)[0], r3 = g.children(m1)[1];
  const NodeId m2 = *g.find_molecule("m2"), m3 = *g.find_molecule("m3"), m4 = *g.find_molecule("m4");
  std::vector<double> p(g.size(), 0.0);
  p[r1] = 0.8, p[r2] = 0.6, p[r3] = 0.7, p[r4] = 0.3;
  p[m2] = 0.9, p[m3] = 0.5, p[m4] = 0.95, p[m1] = 0.1;
  const double via_m1 = 1 - (1 - p[m1]) * (1 - (1 - (1 - p[r2] * p[m2]) * (1 - p[r3] * p[m3])));
  const double want = 1 - (1 - p[r1] * via_m1) * (1 - p[r4] * p[m4]);
  const double exact = exact_ssp_independent(g, p);
  EXPECT_NEAR(exact, want, 1e-12);

  const std::size_t k = 100000;
  ScenarioMatrix m(k, 3);
  IndependentFeasibility f([&](const AndOrGraph&, NodeId n) { return p[n]; });
  IndependentBuyability b([&](const AndOrGraph&, NodeId n) { return p[n]; });
  cover(m, g, f, b);
  EXPECT_NEAR(estimate_ssp(g, m), exact, 4 * std::sqrt(exact * (1 - exact) / k));
}

TEST(ExactSsp, RefusesLargeInstances) {
  AndOrGraph g("t");
  std::vector<Proposal> props;
  for (int i = 0; i < 12; ++i) props.push_back({{"m" + std::to_string(i)}, 0.5});
  g.expand(0, props);
  std::vector<double> p(g.size(), 0.5);
  try {
    exact_ssp_independent(g, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::capacity);
  }
}

// Independent brute-force CNF evaluator.
bool satisfiable(const Cnf& cnf) {
  for (std::uint32_t mask = 0; mask < (1u << cnf.variables); ++mask) {
    bool all = true;
    for (const auto& c : cnf.clauses) {
      bool any = false;
      for (int lit : c) {
        const bool truth = (mask >> (std::abs(lit) - 1)) & 1U;
        any = any || (lit > 0 ? truth : !truth);
      }
      all = all && any;
    }
    if (all) return true;
  }
  return false;
}

TEST(SatGadget, SmallFormulas) {
  Cnf sat{1, {{1, 1, 1}}};
  EXPECT_GT(exact_gadget_ssp(sat_gadget(sat)), 0.0);
  Cnf unsat{1, {{1, 1, 1}, {-1, -1, -1}}};
  EXPECT_EQ(exact_gadget_ssp(sat_gadget(unsat)), 0.0);

  Cnf all8{3, {}};
  for (int mask = 0; mask < 8; ++mask) {
    all8.clauses.push_back({(mask & 1) ? 1 : -1, (mask & 2) ? 2 : -2, (mask & 4) ? 3 : -3});
  }
  EXPECT_FALSE(satisfiable(all8));
  EXPECT_EQ(exact_gadget_ssp(sat_gadget(all8)), 0.0);
  for (int drop = 0; drop < 8; ++drop) {
    Cnf seven{3, {}};
    for (int i = 0; i < 8; ++i) {
      if (i != drop) seven.clauses.push_back(all8.clauses[i]);
    }
    EXPECT_TRUE(satisfiable(seven));
    EXPECT_GT(exact_gadget_ssp(sat_gadget(seven)), 0.0);
  }
}

TEST(SatGadget, StructureAndSampledBuyability) {
  Cnf cnf{2, {{1, -2, 2}, {-1, -1, 2}}};
  auto gadget = sat_gadget(cnf);
  const auto& g = gadget.graph;
  ASSERT_EQ(g.children(0).size(), 1u);
  EXPECT_EQ(g.children(g.children(0)[0]).size(), 2u);
  GadgetBuyability buy(gadget);
  IndependentFeasibility feas(constant_marginal(1.0));
  ScenarioMatrix m(20000, 5);
  cover(m, g, feas, buy);
  for (int v = 0; v < 2; ++v) {
    for (std::size_t j = 0; j < 200; ++j) {
      EXPECT_NE(m.outcome(gadget.positive[v], j), m.outcome(gadget.negative[v], j));
    }
  }
  // The first clause is a tautology; the second fails only for x1 = 1, x2 = 0.
  EXPECT_DOUBLE_EQ(exact_gadget_ssp(gadget), 0.75);
  EXPECT_NEAR(estimate_ssp(g, m), 0.75, 4 * std::sqrt(0.1875 / 20000));
}

TEST(SatGadget, RejectsMalformedClauses) {
  EXPECT_THROW(sat_gadget(Cnf{2, {{1, 0, 2}}}), Error);
  EXPECT_THROW(sat_gadget(Cnf{2, {{1, 3, 2}}}), Error);
  EXPECT_THROW(sat_gadget(Cnf{0, {}}), Error);
}

}  // namespace
}  // namespace rfb
