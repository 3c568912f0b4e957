#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfb/graph.hpp"
#include "rfb/uncertainty.hpp"

namespace rfb {

// Outcomes of one scenario indexed by node id: feasibility for reactions,
// buyability for molecules.
using Outcomes = std::span<const std::uint8_t>;

// 1 iff every reaction in the plan is feasible and every plan leaf is buyable.
bool plan_success(const AndOrGraph& graph, const SynthesisPlan& plan, Outcomes outcomes);

// Least fixed point of the success recursions for one scenario, found by
// sweeping nodes in reverse insertion order from s = 0 until nothing changes.
std::vector<std::uint8_t> compute_s(const AndOrGraph& graph, Outcomes outcomes);

// Success bits for all scenarios at once. Nodes can be added as the graph
// grows; values only ever switch on, so updates propagate from the new nodes
// upward and the result is always the least fixed point.
class SuccessTracker {
 public:
  explicit SuccessTracker(std::size_t k);

  // Brings the tracker up to date with every node of `graph`.
  void update(const AndOrGraph& graph, const ScenarioMatrix& matrix);

  std::size_t k() const noexcept { return k_; }
  std::span<const std::uint64_t> bits(NodeId id) const { return {rows_.data() + id * words_, words_}; }
  bool value(NodeId id, std::size_t scenario) const { return (bits(id)[scenario / 64] >> (scenario % 64)) & 1U; }
  std::size_t successes(NodeId id) const;
  double ssp(NodeId root = 0) const;
  bool all_solved(NodeId root = 0) const { return successes(root) == k_; }

 private:
  bool recompute(const AndOrGraph& graph, const ScenarioMatrix& matrix, NodeId id);

  std::size_t k_;
  std::size_t words_;
  std::size_t nodes_ = 0;
  std::vector<std::uint64_t> rows_;
  // Expansion state seen at the last update, to find newly expanded molecules.
  std::vector<std::uint8_t> expanded_;
};

// (1/k) * number of scenarios in which the root succeeds.
double estimate_ssp(const AndOrGraph& graph, const ScenarioMatrix& matrix);

// Exact SSP when every outcome is independent with the given per-node
// marginals, by summing over all assignments of the uncertain outcomes.
double exact_ssp_independent(const AndOrGraph& graph, std::span<const double> marginals);
inline constexpr std::size_t kMaxExactVariables = 20;

// 3-CNF with literals +v / -v for variables v in 1..variables.
struct Cnf {
  int variables = 0;
  std::vector<std::array<int, 3>> clauses;
};

// Graph encoding of a 3-CNF: the target has one reaction whose reactants are
// the clause molecules; each clause molecule has one single-reactant reaction
// per literal. Literal molecules stay on the frontier.
inline constexpr NodeId kAbsentLiteral = static_cast<NodeId>(-1);

struct SatGadget {
  Cnf cnf;
  AndOrGraph graph{"target"};
  // Molecule of literal +v / -v at index v-1, or kAbsentLiteral when the
  // literal occurs in no clause.
  std::vector<NodeId> positive;
  std::vector<NodeId> negative;
};

SatGadget sat_gadget(const Cnf& cnf);

// Buyability for a gadget: each scenario draws one uniform truth assignment and
// exactly one of x_v / not-x_v is buyable. Other molecules are never buyable.
class GadgetBuyability final : public BuyabilityModel {
 public:
  explicit GadgetBuyability(const SatGadget& gadget);
  double marginal(const AndOrGraph& graph, NodeId molecule) const override;
  void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> molecules) const override;

 private:
  std::vector<int> literal_;  // per node: +v, -v, or 0
};

// Exact gadget SSP by enumerating every assignment (all reactions feasible).
double exact_gadget_ssp(const SatGadget& gadget);

}  // namespace rfb
