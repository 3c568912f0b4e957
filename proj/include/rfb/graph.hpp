#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rfb {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { molecule, reaction };

// Tree mode duplicates molecules reached along different paths; graph mode
// stores each molecule string once and may therefore contain cycles.
enum class GraphMode : std::uint8_t { tree, graph };

std::string_view to_string(GraphMode mode) noexcept;
GraphMode parse_graph_mode(std::string_view text);

// One reaction proposed by a backward model for a product molecule.
struct Proposal {
  std::vector<std::string> reactants;
  double score = 0.0;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct Node {
  NodeKind kind = NodeKind::molecule;

  // Molecule fields.
  std::string molecule;
  bool expanded = false;
  std::optional<int> purchase_tier;

  // Reaction fields. `rank` is the 1-based position in the model output.
  NodeId product = 0;
  int rank = 0;
  double score = 0.0;

  // Molecule: child reactions. Reaction: reactant molecules in proposal order.
  std::vector<NodeId> children;
  // Molecule: reactions consuming it. Reaction: its single product.
  std::vector<NodeId> parents;

  bool is_molecule() const noexcept { return kind == NodeKind::molecule; }
  bool is_reaction() const noexcept { return kind == NodeKind::reaction; }
};

using TierLookup = std::function<std::optional<int>(std::string_view)>;

// Explicit AND/OR search graph. Node ids are dense and assigned in insertion
// order; the target molecule is always node 0. Nodes and edges are never
// removed, and each molecule is expanded at most once.
class AndOrGraph {
 public:
  explicit AndOrGraph(std::string target, GraphMode mode = GraphMode::graph, TierLookup tiers = {});

  NodeId root() const noexcept { return 0; }
  GraphMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t molecule_count() const noexcept { return molecule_count_; }
  std::size_t reaction_count() const noexcept { return nodes_.size() - molecule_count_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::string& target() const noexcept { return nodes_.front().molecule; }
  std::span<const NodeId> children(NodeId id) const { return nodes_.at(id).children; }
  std::span<const NodeId> parents(NodeId id) const { return nodes_.at(id).parents; }

  bool is_frontier(NodeId id) const {
    const Node& n = nodes_.at(id);
    return n.is_molecule() && !n.expanded;
  }
  std::vector<NodeId> frontier() const;
  std::size_t frontier_size() const noexcept { return frontier_size_; }

  // First molecule node carrying `molecule` (the only one in graph mode).
  std::optional<NodeId> find_molecule(std::string_view molecule) const;

  // Adds all proposals as children of a frontier molecule and marks it
  // expanded, returning the ids of newly created nodes in insertion order.
  // Proposals whose reactant multiset repeats an earlier one are dropped.
  std::vector<NodeId> expand(NodeId molecule, std::span<const Proposal> proposals);

  void set_purchase_tier(NodeId molecule, std::optional<int> tier);

  // Canonical content key: "product>reactant.reactant" with sorted reactants.
  std::string reaction_key(NodeId reaction) const;

  // Reconstructs a graph from a node table (used by deserialization).
  static AndOrGraph from_nodes(GraphMode mode, std::vector<Node> nodes);

 private:
  AndOrGraph() = default;
  NodeId add_molecule(std::string molecule);

  GraphMode mode_ = GraphMode::graph;
  TierLookup tiers_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> molecule_index_;
  std::size_t edge_count_ = 0;
  std::size_t molecule_count_ = 0;
  std::size_t frontier_size_ = 0;
};

// A synthesis plan is identified by its node set (the induced subgraph).
struct SynthesisPlan {
  NodeId root = 0;
  std::vector<NodeId> nodes;  // sorted ascending

  bool contains(NodeId id) const;
  std::vector<NodeId> reactions(const AndOrGraph& graph) const;
  // Molecules with no chosen reaction inside the plan.
  std::vector<NodeId> frontier(const AndOrGraph& graph) const;

  friend bool operator==(const SynthesisPlan&, const SynthesisPlan&) = default;
};

// Checks the plan conditions: rooted, closed under reactants, at most one
// reaction per molecule, connected through parents to the root, acyclic.
bool is_valid_plan(const AndOrGraph& graph, const SynthesisPlan& plan, std::string* reason = nullptr);

// Enumerates distinct plans producing `product`, including the singleton plan,
// stopping after `max_count` plans. Recursion never re-enters a molecule on the
// current path, so cyclic graphs terminate.
std::vector<SynthesisPlan> enumerate_plans(const AndOrGraph& graph, NodeId product, std::size_t max_count);

// Depth-first post-order from the root (children before parents). `cyclic`
// is set when a back edge was found.
// Strongly connected components in children-first order; `postorder` lists
// their members contiguously. Acyclic graphs have one singleton per node.
struct TraversalOrder {
  struct Component {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool cyclic = false;
  };
  std::vector<NodeId> postorder;
  std::vector<Component> components;
  bool cyclic = false;
};
TraversalOrder traversal_order(const AndOrGraph& graph);

// Line-delimited JSON: a header object followed by one object per node.
void write_jsonl(const AndOrGraph& graph, std::ostream& out);
AndOrGraph read_jsonl(std::istream& in);

}  // namespace rfb
