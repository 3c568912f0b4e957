#include "rfb/success.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>

#include "rfb/error.hpp"
#include "rfb/random.hpp"

namespace rfb {

bool plan_success(const AndOrGraph& graph, const SynthesisPlan& plan, Outcomes outcomes) {
  for (NodeId r : plan.reactions(graph)) {
    if (!outcomes[r]) return false;
  }
  for (NodeId m : plan.frontier(graph)) {
    if (!outcomes[m]) return false;
  }
  return true;
}

std::vector<std::uint8_t> compute_s(const AndOrGraph& graph, Outcomes outcomes) {
  const auto n = graph.size();
  if (outcomes.size() < n) throw Error(ErrorKind::invalid_input, "scenario does not cover the graph");
  std::vector<std::uint8_t> s(n, 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId id = static_cast<NodeId>(n); id-- > 0;) {
      const Node& node = graph.node(id);
      std::uint8_t v;
      if (node.is_molecule()) {
        v = outcomes[id];
        for (NodeId r : node.children) v |= s[r];
      } else {
        v = outcomes[id];
        for (NodeId c : node.children) v &= s[c];
      }
      if (v != s[id]) {
        s[id] = v;
        changed = true;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------- tracker

SuccessTracker::SuccessTracker(std::size_t k) : k_(k), words_((k + 63) / 64) {
  if (k == 0) throw Error(ErrorKind::invalid_config, "scenario count must be >= 1");
}

bool SuccessTracker::recompute(const AndOrGraph& graph, const ScenarioMatrix& matrix, NodeId id) {
  const Node& node = graph.node(id);
  const auto own = matrix.bits(id);
  std::uint64_t* out = rows_.data() + id * words_;
  bool changed = false;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t v;
    if (node.is_molecule()) {
      v = own[w];
      for (NodeId r : node.children) v |= rows_[r * words_ + w];
    } else {
      v = own[w];
      for (NodeId c : node.children) v &= rows_[c * words_ + w];
    }
    if (v != out[w]) {
      out[w] = v;
      changed = true;
    }
  }
  return changed;
}

void SuccessTracker::update(const AndOrGraph& graph, const ScenarioMatrix& matrix) {
  if (matrix.k() != k_) throw Error(ErrorKind::invalid_input, "scenario matrix width differs from the tracker");
  const auto n = graph.size();
  if (n < nodes_) throw Error(ErrorKind::invalid_input, "graph shrank between tracker updates");
  rows_.resize(n * words_, 0);
  expanded_.resize(n, 0);

  std::deque<NodeId> work;
  std::vector<std::uint8_t> queued(n, 0);
  auto push = [&](NodeId id) {
    if (!queued[id]) {
      queued[id] = 1;
      work.push_back(id);
    }
  };
  for (NodeId id = static_cast<NodeId>(n); id-- > nodes_;) push(id);
  for (NodeId id = 0; id < nodes_; ++id) {
    if (graph.node(id).is_molecule() && graph.node(id).expanded && !expanded_[id]) push(id);
  }
  while (!work.empty()) {
    const NodeId id = work.front();
    work.pop_front();
    queued[id] = 0;
    if (recompute(graph, matrix, id)) {
      for (NodeId p : graph.parents(id)) push(p);
    }
  }
  for (NodeId id = 0; id < n; ++id) expanded_[id] = graph.node(id).expanded ? 1 : 0;
  nodes_ = n;
}

std::size_t SuccessTracker::successes(NodeId id) const {
  std::size_t total = 0;
  for (auto w : bits(id)) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

double SuccessTracker::ssp(NodeId root) const {
  return static_cast<double>(successes(root)) / static_cast<double>(k_);
}

double estimate_ssp(const AndOrGraph& graph, const ScenarioMatrix& matrix) {
  if (!matrix.covers(graph)) throw Error(ErrorKind::precondition, "scenario matrix does not cover the graph");
  SuccessTracker tracker(matrix.k());
  tracker.update(graph, matrix);
  return tracker.ssp(graph.root());
}

double exact_ssp_independent(const AndOrGraph& graph, std::span<const double> marginals) {
  const auto n = graph.size();
  if (marginals.size() < n) throw Error(ErrorKind::invalid_input, "marginals do not cover the graph");
  std::vector<std::uint8_t> base(n, 0);
  std::vector<NodeId> uncertain;
  for (NodeId id = 0; id < n; ++id) {
    const double p = marginals[id];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "marginal outside [0, 1]");
    if (p == 1.0) base[id] = 1;
    if (p > 0.0 && p < 1.0) uncertain.push_back(id);
  }
  if (uncertain.size() > kMaxExactVariables) {
    throw Error(ErrorKind::capacity, std::to_string(uncertain.size()) + " uncertain outcomes exceed the exact limit of " +
                                         std::to_string(kMaxExactVariables));
  }
  double total = 0.0;
  std::vector<std::uint8_t> outcomes = base;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << uncertain.size()); ++mask) {
    double prob = 1.0;
    for (std::size_t i = 0; i < uncertain.size(); ++i) {
      const bool on = (mask >> i) & 1U;
      outcomes[uncertain[i]] = on ? 1 : 0;
      prob *= on ? marginals[uncertain[i]] : 1.0 - marginals[uncertain[i]];
    }
    if (compute_s(graph, outcomes)[graph.root()]) total += prob;
  }
  return total;
}

// ---------------------------------------------------------------- gadget

namespace {

std::string literal_name(int literal) {
  return (literal > 0 ? "x" : "~x") + std::to_string(std::abs(literal));
}

}  // namespace

SatGadget sat_gadget(const Cnf& cnf) {
  if (cnf.variables < 1) throw Error(ErrorKind::invalid_input, "CNF needs at least one variable");
  if (cnf.clauses.empty()) throw Error(ErrorKind::invalid_input, "CNF needs at least one clause");
  for (const auto& clause : cnf.clauses) {
    for (int lit : clause) {
      if (lit == 0 || std::abs(lit) > cnf.variables) {
        throw Error(ErrorKind::invalid_input, "literal " + std::to_string(lit) + " is out of range");
      }
    }
  }
  SatGadget g;
  g.cnf = cnf;
  Proposal all_clauses;
  all_clauses.score = 1.0;
  for (std::size_t i = 0; i < cnf.clauses.size(); ++i) all_clauses.reactants.push_back("clause" + std::to_string(i + 1));
  g.graph.expand(g.graph.root(), std::vector<Proposal>{all_clauses});
  for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
    std::vector<Proposal> literals;
    for (int lit : cnf.clauses[i]) literals.push_back({{literal_name(lit)}, 1.0});
    g.graph.expand(*g.graph.find_molecule("clause" + std::to_string(i + 1)), literals);
  }
  for (int v = 1; v <= cnf.variables; ++v) {
    auto pos = g.graph.find_molecule(literal_name(v));
    auto neg = g.graph.find_molecule(literal_name(-v));
    g.positive.push_back(pos ? *pos : kAbsentLiteral);
    g.negative.push_back(neg ? *neg : kAbsentLiteral);
  }
  return g;
}

GadgetBuyability::GadgetBuyability(const SatGadget& gadget) : literal_(gadget.graph.size(), 0) {
  for (int v = 1; v <= gadget.cnf.variables; ++v) {
    if (gadget.positive[v - 1] != kAbsentLiteral) literal_[gadget.positive[v - 1]] = v;
    if (gadget.negative[v - 1] != kAbsentLiteral) literal_[gadget.negative[v - 1]] = -v;
  }
}

double GadgetBuyability::marginal(const AndOrGraph&, NodeId molecule) const {
  return molecule < literal_.size() && literal_[molecule] != 0 ? 0.5 : 0.0;
}

void GadgetBuyability::extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> molecules) const {
  constexpr std::uint64_t kAssignmentSalt = 0x736174ULL;
  for (NodeId m : molecules) {
    if (matrix.has_row(m)) continue;
    if (!graph.node(m).is_molecule()) throw Error(ErrorKind::invalid_input, "buyability row for a reaction");
    const int lit = m < literal_.size() ? literal_[m] : 0;
    std::vector<std::uint64_t> row(matrix.words(), 0);
    if (lit != 0) {
      // Variable v's truth value in scenario j; shared by both literal molecules.
      const std::uint64_t stream = rng::combine(rng::combine(matrix.seed(), kAssignmentSalt), static_cast<std::uint64_t>(std::abs(lit)));
      for (std::size_t j = 0; j < matrix.k(); ++j) {
        const bool truth = rng::uniform(stream, j) < 0.5;
        if (truth == (lit > 0)) row[j / 64] |= std::uint64_t{1} << (j % 64);
      }
    }
    matrix.set_row(m, std::move(row));
  }
}

double exact_gadget_ssp(const SatGadget& gadget) {
  const int n = gadget.cnf.variables;
  if (n > static_cast<int>(kMaxExactVariables)) throw Error(ErrorKind::capacity, "too many gadget variables to enumerate");
  const auto& graph = gadget.graph;
  std::vector<std::uint8_t> outcomes(graph.size(), 0);
  for (NodeId id = 0; id < graph.size(); ++id) {
    if (graph.node(id).is_reaction()) outcomes[id] = 1;
  }
  std::size_t satisfied = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (int v = 1; v <= n; ++v) {
      const bool truth = (mask >> (v - 1)) & 1U;
      if (gadget.positive[v - 1] != kAbsentLiteral) outcomes[gadget.positive[v - 1]] = truth ? 1 : 0;
      if (gadget.negative[v - 1] != kAbsentLiteral) outcomes[gadget.negative[v - 1]] = truth ? 0 : 1;
    }
    if (compute_s(graph, outcomes)[graph.root()]) ++satisfied;
  }
  return static_cast<double>(satisfied) / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace rfb
