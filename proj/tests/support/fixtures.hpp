#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rfb/graph.hpp"

namespace rfb::testing {

// A graph together with named node ids and (optionally) one scenario.
struct Fixture {
  AndOrGraph graph{"m*"};
  std::map<std::string, NodeId> id;
  std::vector<std::uint8_t> outcome;  // f for reactions, b for molecules
  std::vector<double> h;              // heuristic for frontier molecules

  NodeId operator[](const std::string& name) const { return id.at(name); }
};

// Fig. 1a graph. With `expand_c` false, m_c is left on the frontier.
Fixture figure1(bool expand_c);

// The worked example graph with its single scenario and heuristic values.
Fixture worked_example();

// Plan rendered as sorted node names, for readable assertions.
std::vector<std::string> plan_names(const Fixture& fx, const SynthesisPlan& plan);

// Random tree in tree mode with at most `max_nodes` nodes, every molecule string
// distinct, so no plan uses a molecule twice. Fills outcome and h randomly with
// values from {0, 0.25, 0.5, 0.75, 1} for h and {0, 1} outcomes.
Fixture random_tree(std::uint64_t seed, std::size_t max_nodes);

// Random small graph-mode graph (may share molecules, may contain cycles).
Fixture random_graph(std::uint64_t seed, std::size_t max_nodes);

}  // namespace rfb::testing
