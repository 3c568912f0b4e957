#include "rfb/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "rfb/error.hpp"

namespace rfb {

using nlohmann::json;

std::string_view to_string(GraphMode mode) noexcept {
  return mode == GraphMode::tree ? "tree" : "graph";
}

GraphMode parse_graph_mode(std::string_view text) {
  if (text == "tree") return GraphMode::tree;
  if (text == "graph") return GraphMode::graph;
  throw Error(ErrorKind::invalid_input, "unknown graph mode '" + std::string(text) + "'");
}

AndOrGraph::AndOrGraph(std::string target, GraphMode mode, TierLookup tiers)
    : mode_(mode), tiers_(std::move(tiers)) {
  if (target.empty()) throw Error(ErrorKind::invalid_input, "target molecule must be nonempty");
  add_molecule(std::move(target));
}

NodeId AndOrGraph::add_molecule(std::string molecule) {
  const auto id = static_cast<NodeId>(nodes_.size());
  Node n;
  n.kind = NodeKind::molecule;
  if (tiers_) n.purchase_tier = tiers_(molecule);
  n.molecule = std::move(molecule);
  if (mode_ == GraphMode::graph || molecule_index_.find(n.molecule) == molecule_index_.end()) {
    molecule_index_.emplace(n.molecule, id);
  }
  nodes_.push_back(std::move(n));
  ++molecule_count_;
  ++frontier_size_;
  return id;
}

std::vector<NodeId> AndOrGraph::frontier() const {
  std::vector<NodeId> out;
  out.reserve(frontier_size_);
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (is_frontier(id)) out.push_back(id);
  }
  return out;
}

std::optional<NodeId> AndOrGraph::find_molecule(std::string_view molecule) const {
  auto it = molecule_index_.find(std::string(molecule));
  if (it == molecule_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> AndOrGraph::expand(NodeId molecule, std::span<const Proposal> proposals) {
  if (molecule >= nodes_.size() || !nodes_[molecule].is_molecule()) {
    throw Error(ErrorKind::precondition, "expand target is not a molecule node");
  }
  if (nodes_[molecule].expanded) {
    throw Error(ErrorKind::precondition, "molecule '" + nodes_[molecule].molecule + "' is not on the frontier");
  }
  const std::string product = nodes_[molecule].molecule;

  // Validate everything before mutating.
  std::vector<std::size_t> kept;
  std::set<std::vector<std::string>> seen;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& reactants = proposals[i].reactants;
    if (reactants.empty()) {
      throw Error(ErrorKind::rejected_proposal, "proposal " + std::to_string(i) + " for '" + product + "' has no reactants");
    }
    for (const auto& r : reactants) {
      if (r.empty()) throw Error(ErrorKind::rejected_proposal, "empty reactant string for '" + product + "'");
      if (r == product) {
        throw Error(ErrorKind::rejected_proposal, "proposal for '" + product + "' lists the product as a reactant");
      }
    }
    auto key = reactants;
    std::sort(key.begin(), key.end());
    // Repeated reactants share one node in graph mode.
    if (mode_ == GraphMode::graph) key.erase(std::unique(key.begin(), key.end()), key.end());
    if (seen.insert(std::move(key)).second) kept.push_back(i);
  }

  std::vector<NodeId> added;
  nodes_[molecule].expanded = true;
  --frontier_size_;
  for (std::size_t i : kept) {
    const auto rid = static_cast<NodeId>(nodes_.size());
    Node r;
    r.kind = NodeKind::reaction;
    r.product = molecule;
    r.rank = static_cast<int>(i) + 1;
    r.score = proposals[i].score;
    r.parents.push_back(molecule);
    nodes_.push_back(std::move(r));
    nodes_[molecule].children.push_back(rid);
    ++edge_count_;
    added.push_back(rid);

    for (const auto& reactant : proposals[i].reactants) {
      NodeId mid;
      if (mode_ == GraphMode::graph) {
        if (auto existing = find_molecule(reactant)) {
          mid = *existing;
        } else {
          mid = add_molecule(reactant);
          added.push_back(mid);
        }
        auto& ch = nodes_[rid].children;
        if (std::find(ch.begin(), ch.end(), mid) != ch.end()) continue;
      } else {
        mid = add_molecule(reactant);
        added.push_back(mid);
      }
      nodes_[rid].children.push_back(mid);
      nodes_[mid].parents.push_back(rid);
      ++edge_count_;
    }
  }
  return added;
}

void AndOrGraph::set_purchase_tier(NodeId molecule, std::optional<int> tier) {
  if (!nodes_.at(molecule).is_molecule()) throw Error(ErrorKind::invalid_input, "purchase tier on a reaction node");
  nodes_[molecule].purchase_tier = tier;
}

std::string AndOrGraph::reaction_key(NodeId reaction) const {
  const Node& r = nodes_.at(reaction);
  if (!r.is_reaction()) throw Error(ErrorKind::invalid_input, "reaction_key on a molecule node");
  std::vector<std::string_view> names;
  names.reserve(r.children.size());
  for (NodeId c : r.children) names.push_back(nodes_[c].molecule);
  std::sort(names.begin(), names.end());
  std::string key = nodes_[r.product].molecule;
  key += '>';
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) key += '.';
    key += names[i];
  }
  return key;
}

AndOrGraph AndOrGraph::from_nodes(GraphMode mode, std::vector<Node> nodes) {
  if (nodes.empty() || !nodes.front().is_molecule() || nodes.front().molecule.empty()) {
    throw Error(ErrorKind::invalid_input, "node table must start with the target molecule");
  }
  AndOrGraph g;
  g.mode_ = mode;
  const auto n = nodes.size();
  for (NodeId id = 0; id < n; ++id) {
    Node& node = nodes[id];
    node.parents.clear();
    if (node.is_molecule()) {
      if (node.molecule.empty()) throw Error(ErrorKind::invalid_input, "empty molecule string");
      ++g.molecule_count_;
      if (!node.expanded) ++g.frontier_size_;
      if (mode == GraphMode::graph && g.molecule_index_.count(node.molecule)) {
        throw Error(ErrorKind::invalid_input, "duplicate molecule '" + node.molecule + "' in graph mode");
      }
      g.molecule_index_.emplace(node.molecule, id);
    } else if (node.product >= n || !nodes[node.product].is_molecule() || node.children.empty()) {
      throw Error(ErrorKind::invalid_input, "malformed reaction node " + std::to_string(id));
    }
  }
  for (NodeId id = 0; id < n; ++id) {
    if (!nodes[id].is_reaction()) continue;
    nodes[id].parents.push_back(nodes[id].product);
    for (NodeId c : nodes[id].children) {
      if (c >= n || !nodes[c].is_molecule() || c == nodes[id].product) {
        throw Error(ErrorKind::invalid_input, "malformed reactant reference in node " + std::to_string(id));
      }
      nodes[c].parents.push_back(id);
      ++g.edge_count_;
    }
    ++g.edge_count_;
  }
  for (NodeId id = 0; id < n; ++id) {
    if (!nodes[id].is_molecule()) continue;
    for (NodeId c : nodes[id].children) {
      if (c >= n || !nodes[c].is_reaction() || nodes[c].product != id) {
        throw Error(ErrorKind::invalid_input, "molecule child is not one of its reactions: node " + std::to_string(id));
      }
    }
  }
  g.nodes_ = std::move(nodes);
  return g;
}

// ---------------------------------------------------------------------------
// Synthesis plans

bool SynthesisPlan::contains(NodeId id) const {
  return std::binary_search(nodes.begin(), nodes.end(), id);
}

std::vector<NodeId> SynthesisPlan::reactions(const AndOrGraph& graph) const {
  std::vector<NodeId> out;
  for (NodeId id : nodes) {
    if (graph.node(id).is_reaction()) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> SynthesisPlan::frontier(const AndOrGraph& graph) const {
  std::vector<NodeId> out;
  for (NodeId id : nodes) {
    if (!graph.node(id).is_molecule()) continue;
    const auto ch = graph.children(id);
    if (std::none_of(ch.begin(), ch.end(), [&](NodeId r) { return contains(r); })) out.push_back(id);
  }
  return out;
}

namespace {

bool induced_acyclic(const AndOrGraph& graph, const std::vector<NodeId>& nodes) {
  // Kahn's algorithm on the induced subgraph.
  std::unordered_map<NodeId, int> indegree;
  for (NodeId id : nodes) indegree[id] = 0;
  for (NodeId id : nodes) {
    for (NodeId c : graph.children(id)) {
      if (auto it = indegree.find(c); it != indegree.end()) ++it->second;
    }
  }
  std::vector<NodeId> ready;
  for (auto [id, d] : indegree) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    NodeId id = ready.back();
    ready.pop_back();
    ++visited;
    for (NodeId c : graph.children(id)) {
      if (auto it = indegree.find(c); it != indegree.end() && --it->second == 0) ready.push_back(c);
    }
  }
  return visited == nodes.size();
}

}  // namespace

bool is_valid_plan(const AndOrGraph& graph, const SynthesisPlan& plan, std::string* reason) {
  auto fail = [&](std::string why) {
    if (reason) *reason = std::move(why);
    return false;
  };
  if (plan.nodes.empty()) return fail("empty plan");
  if (!std::is_sorted(plan.nodes.begin(), plan.nodes.end()) ||
      std::adjacent_find(plan.nodes.begin(), plan.nodes.end()) != plan.nodes.end()) {
    return fail("node list must be sorted and unique");
  }
  if (plan.nodes.back() >= graph.size()) return fail("node outside graph");
  if (!plan.contains(plan.root) || !graph.node(plan.root).is_molecule()) return fail("root must be a molecule in the plan");

  for (NodeId id : plan.nodes) {
    const Node& n = graph.node(id);
    if (n.is_reaction()) {
      if (!plan.contains(n.product)) return fail("reaction without its product");
      for (NodeId c : n.children) {
        if (!plan.contains(c)) return fail("reaction missing a reactant");
      }
    } else {
      int chosen = 0;
      for (NodeId r : n.children) chosen += plan.contains(r) ? 1 : 0;
      if (chosen > 1) return fail("molecule with more than one reaction");
      int used_by = 0;
      for (NodeId r : n.parents) used_by += plan.contains(r) ? 1 : 0;
      if (id == plan.root && used_by > 0) return fail("root has a parent in the plan");
      if (id != plan.root && used_by == 0) return fail("molecule disconnected from the root");
    }
  }
  if (!induced_acyclic(graph, plan.nodes)) return fail("plan contains a cycle");
  return true;
}

namespace {

class PlanEnumerator {
 public:
  PlanEnumerator(const AndOrGraph& graph, std::size_t cap) : graph_(graph), cap_(cap), on_path_(graph.size(), false) {}

  std::vector<std::vector<NodeId>> plans_for(NodeId m) {
    std::vector<std::vector<NodeId>> out;
    std::set<std::vector<NodeId>> seen;
    out.push_back({m});
    seen.insert(out.back());
    on_path_[m] = true;
    for (NodeId r : graph_.children(m)) {
      if (out.size() >= cap_) break;
      const auto reactants = graph_.children(r);
      if (std::any_of(reactants.begin(), reactants.end(), [&](NodeId c) { return on_path_[c]; })) continue;

      std::vector<std::vector<std::vector<NodeId>>> sub;
      sub.reserve(reactants.size());
      bool empty = false;
      for (NodeId c : reactants) {
        sub.push_back(plans_for(c));
        if (sub.back().empty()) empty = true;
      }
      if (empty) continue;

      // Odometer over the cartesian product of sub-plans.
      std::vector<std::size_t> idx(sub.size(), 0);
      while (out.size() < cap_) {
        std::vector<NodeId> merged{m, r};
        for (std::size_t i = 0; i < sub.size(); ++i) {
          const auto& part = sub[i][idx[i]];
          merged.insert(merged.end(), part.begin(), part.end());
        }
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        SynthesisPlan candidate{m, merged};
        if (!seen.count(merged) && is_valid_plan(graph_, candidate)) {
          seen.insert(merged);
          out.push_back(std::move(merged));
        }
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == sub[pos].size()) idx[pos++] = 0;
        if (pos == idx.size()) break;
      }
    }
    on_path_[m] = false;
    return out;
  }

 private:
  const AndOrGraph& graph_;
  std::size_t cap_;
  std::vector<bool> on_path_;
};

}  // namespace

std::vector<SynthesisPlan> enumerate_plans(const AndOrGraph& graph, NodeId product, std::size_t max_count) {
  if (product >= graph.size() || !graph.node(product).is_molecule()) {
    throw Error(ErrorKind::not_found, "product molecule " + std::to_string(product) + " is not in the graph");
  }
  std::vector<SynthesisPlan> out;
  if (max_count == 0) return out;
  PlanEnumerator e(graph, max_count);
  for (auto& nodes : e.plans_for(product)) out.push_back(SynthesisPlan{product, std::move(nodes)});
  return out;
}

TraversalOrder traversal_order(const AndOrGraph& graph) {
  // Iterative Tarjan; components are emitted children first.
  TraversalOrder result;
  const std::size_t n = graph.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  result.postorder.reserve(n);
  std::vector<std::size_t> index(n, unset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> scc_stack;
  std::vector<std::pair<NodeId, std::size_t>> stack;
  std::size_t counter = 0;
  for (NodeId start = 0; start < n; ++start) {
    if (index[start] != unset) continue;
    stack.emplace_back(start, 0);
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      if (next == 0 && index[id] == unset) {
        index[id] = low[id] = counter++;
        scc_stack.push_back(id);
        on_stack[id] = true;
      }
      const auto ch = graph.children(id);
      if (next < ch.size()) {
        const NodeId c = ch[next++];
        if (index[c] == unset) {
          stack.emplace_back(c, 0);
        } else if (on_stack[c]) {
          low[id] = std::min(low[id], index[c]);
        }
        continue;
      }
      const NodeId done = id;
      stack.pop_back();
      if (!stack.empty()) low[stack.back().first] = std::min(low[stack.back().first], low[done]);
      if (low[done] != index[done]) continue;
      TraversalOrder::Component comp;
      comp.begin = result.postorder.size();
      NodeId member;
      do {
        member = scc_stack.back();
        scc_stack.pop_back();
        on_stack[member] = false;
        result.postorder.push_back(member);
      } while (member != done);
      comp.end = result.postorder.size();
      comp.cyclic = comp.end - comp.begin > 1;
      result.cyclic = result.cyclic || comp.cyclic;
      result.components.push_back(comp);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

void write_jsonl(const AndOrGraph& graph, std::ostream& out) {
  json header = {{"kind", "header"}, {"mode", to_string(graph.mode())}, {"root", graph.root()}, {"version", 1}};
  out << header.dump() << '\n';
  for (NodeId id = 0; id < graph.size(); ++id) {
    const Node& n = graph.node(id);
    json j;
    j["id"] = id;
    if (n.is_molecule()) {
      j["kind"] = "molecule";
      j["molecule"] = n.molecule;
      j["expanded"] = n.expanded;
      j["tier"] = n.purchase_tier ? json(*n.purchase_tier) : json(nullptr);
    } else {
      j["kind"] = "reaction";
      j["product"] = n.product;
      j["reactants"] = n.children;
      j["rank"] = n.rank;
      j["score"] = n.score;
    }
    out << j.dump() << '\n';
  }
}

AndOrGraph read_jsonl(std::istream& in) {
  std::string line;
  GraphMode mode = GraphMode::graph;
  bool have_header = false;
  std::vector<Node> nodes;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_input, "graph line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const std::string kind = j.at("kind");
      if (kind == "header") {
        mode = parse_graph_mode(j.at("mode").get<std::string>());
        have_header = true;
        continue;
      }
      const auto id = j.at("id").get<NodeId>();
      if (id != nodes.size()) throw Error(ErrorKind::invalid_input, "node ids must be dense and ordered");
      Node n;
      if (kind == "molecule") {
        n.kind = NodeKind::molecule;
        n.molecule = j.at("molecule").get<std::string>();
        n.expanded = j.at("expanded").get<bool>();
        if (j.contains("tier") && !j["tier"].is_null()) n.purchase_tier = j["tier"].get<int>();
      } else if (kind == "reaction") {
        n.kind = NodeKind::reaction;
        n.product = j.at("product").get<NodeId>();
        n.children = j.at("reactants").get<std::vector<NodeId>>();
        n.rank = j.at("rank").get<int>();
        n.score = j.at("score").get<double>();
      } else {
        throw Error(ErrorKind::invalid_input, "unknown node kind '" + kind + "'");
      }
      nodes.push_back(std::move(n));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_input, "graph line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorKind::invalid_input, "graph file has no header line");
  // Molecule children are implied by the reaction products.
  for (NodeId id = 0; id < nodes.size(); ++id) {
    if (nodes[id].is_reaction()) {
      if (nodes[id].product >= nodes.size()) throw Error(ErrorKind::invalid_input, "reaction product out of range");
      nodes[nodes[id].product].children.push_back(id);
    }
  }
  return AndOrGraph::from_nodes(mode, std::move(nodes));
}

}  // namespace rfb
