#include "fixtures.hpp"

#include <algorithm>

#include "rfb/random.hpp"

namespace rfb::testing {

namespace {

std::vector<Proposal> proposals(std::initializer_list<std::vector<std::string>> lists) {
  std::vector<Proposal> out;
  double score = 0.9;
  for (const auto& l : lists) {
    out.push_back({l, score});
    score /= 2;
  }
  return out;
}

// Names reactions r1, r2, ... in creation order and molecules by string.
void name_new(Fixture& fx, const std::vector<NodeId>& added, std::initializer_list<const char*> reaction_names) {
  auto rn = reaction_names.begin();
  for (NodeId n : added) {
    const Node& node = fx.graph.node(n);
    if (node.is_reaction()) {
      fx.id[*rn++] = n;
    } else {
      fx.id[node.molecule] = n;
    }
  }
}

}  // namespace

Fixture figure1(bool expand_c) {
  Fixture fx;
  fx.id["m*"] = 0;
  name_new(fx, fx.graph.expand(0, proposals({{"ma", "mb"}, {"mb", "mc", "md"}})), {"r1", "r2"});
  name_new(fx, fx.graph.expand(fx["ma"], proposals({{"me"}})), {"r3"});
  if (expand_c) name_new(fx, fx.graph.expand(fx["mc"], proposals({{"mf"}, {"mg"}})), {"r4", "r5"});
  return fx;
}

Fixture worked_example() {
  Fixture fx;
  fx.id["m*"] = 0;
  name_new(fx, fx.graph.expand(0, proposals({{"ma", "mb"}, {"mf"}, {"mg", "mh"}})), {"r1", "r4", "r5"});
  name_new(fx, fx.graph.expand(fx["ma"], proposals({{"mc", "md"}})), {"r2"});
  name_new(fx, fx.graph.expand(fx["mb"], proposals({{"md", "me"}})), {"r3"});
  name_new(fx, fx.graph.expand(fx["mh"], proposals({{"mi"}})), {"r6"});

  fx.outcome.assign(fx.graph.size(), 0);
  fx.h.assign(fx.graph.size(), 0.0);
  for (const char* r : {"r1", "r2", "r3", "r5", "r6"}) fx.outcome[fx[r]] = 1;
  for (const char* m : {"mc", "me", "mh"}) fx.outcome[fx[m]] = 1;
  const std::pair<const char*, double> heuristic[] = {{"mc", 0.5}, {"md", 0.1}, {"me", 0.5},
                                                      {"mf", 0.8}, {"mg", 0.9}, {"mi", 0.5}};
  for (auto [m, v] : heuristic) fx.h[fx[m]] = v;
  return fx;
}

std::vector<std::string> plan_names(const Fixture& fx, const SynthesisPlan& plan) {
  std::vector<std::string> names;
  for (NodeId n : plan.nodes) {
    for (const auto& [name, id] : fx.id) {
      if (id == n) names.push_back(name);
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

namespace {

void fill_scenario(Fixture& fx, rng::Stream& rs) {
  static constexpr double levels[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  fx.outcome.assign(fx.graph.size(), 0);
  fx.h.assign(fx.graph.size(), 0.0);
  for (NodeId n = 0; n < fx.graph.size(); ++n) {
    const bool reaction = fx.graph.node(n).is_reaction();
    fx.outcome[n] = rs.uniform() < (reaction ? 0.7 : 0.35) ? 1 : 0;
    if (fx.graph.is_frontier(n)) fx.h[n] = levels[rs.below(5)];
  }
}

}  // namespace

Fixture random_tree(std::uint64_t seed, std::size_t max_nodes) {
  rng::Stream rs(rng::combine(seed, 0x7472656575ULL));
  Fixture fx{AndOrGraph("m0", GraphMode::tree), {}, {}, {}};
  int next_name = 1;
  std::vector<NodeId> open{0};
  while (!open.empty()) {
    const std::size_t pick = rs.below(open.size());
    const NodeId m = open[pick];
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    if (rs.uniform() < 0.25) continue;  // leave on the frontier
    std::vector<Proposal> props;
    std::size_t budget = fx.graph.size();
    const std::size_t n_rxn = rs.below(3);
    for (std::size_t i = 0; i < n_rxn; ++i) {
      const std::size_t n_react = 1 + rs.below(2);
      if (budget + 1 + n_react > max_nodes) break;
      Proposal p;
      for (std::size_t j = 0; j < n_react; ++j) p.reactants.push_back("m" + std::to_string(next_name++));
      p.score = 1.0 / static_cast<double>(i + 1);
      budget += 1 + n_react;
      props.push_back(std::move(p));
    }
    for (NodeId added : fx.graph.expand(m, props)) {
      if (fx.graph.node(added).is_molecule()) open.push_back(added);
    }
  }
  for (NodeId n = 0; n < fx.graph.size(); ++n) {
    const Node& node = fx.graph.node(n);
    fx.id[node.is_molecule() ? node.molecule : "r" + std::to_string(n)] = n;
  }
  fill_scenario(fx, rs);
  return fx;
}

Fixture random_graph(std::uint64_t seed, std::size_t max_nodes) {
  rng::Stream rs(rng::combine(seed, 0x6772617068ULL));
  Fixture fx{AndOrGraph("m0", GraphMode::graph), {}, {}, {}};
  const std::size_t n_names = 2 + rs.below(5);
  std::vector<NodeId> open{0};
  while (!open.empty()) {
    const NodeId m = open.front();
    open.erase(open.begin());
    if (rs.uniform() < 0.2) continue;
    std::vector<Proposal> props;
    const std::size_t n_rxn = rs.below(3);
    std::size_t projected = fx.graph.size();
    for (std::size_t i = 0; i < n_rxn; ++i) {
      Proposal p;
      const std::size_t n_react = 1 + rs.below(2);
      for (std::size_t j = 0; j < n_react; ++j) {
        std::string name = "m" + std::to_string(rs.below(n_names + 1));
        if (name != fx.graph.node(m).molecule) p.reactants.push_back(name);
      }
      if (p.reactants.empty()) continue;
      projected += 1 + p.reactants.size();
      if (projected > max_nodes) break;
      p.score = 1.0 / static_cast<double>(i + 1);
      props.push_back(std::move(p));
    }
    for (NodeId added : fx.graph.expand(m, props)) {
      if (fx.graph.node(added).is_molecule()) open.push_back(added);
    }
  }
  for (NodeId n = 0; n < fx.graph.size(); ++n) {
    const Node& node = fx.graph.node(n);
    fx.id[node.is_molecule() ? node.molecule : "r" + std::to_string(n)] = n;
  }
  fill_scenario(fx, rs);
  return fx;
}

}  // namespace rfb::testing
