#include "rfb/rivals.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "rfb/error.hpp"
#include "rfb/propagation.hpp"
#include "rfb/success.hpp"

namespace rfb {
namespace {

void check(const PlannerConfig& config) {
  if (config.budget < 1) throw Error(ErrorKind::invalid_config, "budget must be >= 1");
  if (config.k < 1) throw Error(ErrorKind::invalid_config, "k must be >= 1");
}

// Graph, search scenarios and trace shared by the baseline loops.
class Search {
 public:
  Search(const std::string& target, GraphMode mode, TierLookup tiers, BackwardModel& model,
         const FeasibilityModel& feasibility, const BuyabilityModel& buyability, const PlannerConfig& config)
      : result{AndOrGraph(target, mode, std::move(tiers)), {}, {}},
        model_(model),
        feasibility_(feasibility),
        buyability_(buyability),
        matrix_(config.k, config.seed),
        success_(config.k),
        budget_(config.budget),
        calls_before_(model.call_count()),
        start_(std::chrono::steady_clock::now()) {
    cover(matrix_, result.graph, feasibility_, buyability_);
    success_.update(result.graph, matrix_);
    result.trace.initial_ssp = success_.ssp();
  }

  AndOrGraph& graph() { return result.graph; }
  const ScenarioMatrix& matrix() const { return matrix_; }
  std::size_t calls() const { return model_.call_count() - calls_before_; }
  bool out_of_budget() const { return calls() >= budget_; }
  double buy_marginal(NodeId m) const { return buyability_.marginal(result.graph, m); }

  // Expands `molecule`; returns the new node ids, or nullopt after recording
  // a model failure as the termination reason.
  std::optional<std::vector<NodeId>> expand(NodeId molecule, double score) {
    std::vector<NodeId> added;
    try {
      const auto& proposals = model_.propose(result.graph.node(molecule).molecule);
      added = result.graph.expand(molecule, proposals);
      extend(matrix_, result.graph, added, feasibility_, buyability_);
    } catch (const Error& e) {
      finish(Termination::error);
      result.trace.error = e.what();
      return std::nullopt;
    }
    result.expansions.push_back(molecule);
    success_.update(result.graph, matrix_);
    TraceStep step;
    step.iteration = result.expansions.size();
    step.selected = molecule;
    step.molecule = result.graph.node(molecule).molecule;
    step.alpha = score;
    step.ssp = success_.ssp();
    step.nodes = result.graph.size();
    step.model_calls = calls();
    step.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    result.trace.steps.push_back(std::move(step));
    return added;
  }

  void finish(Termination t) { result.trace.termination = t; }

  SearchResult result;

 private:
  BackwardModel& model_;
  const FeasibilityModel& feasibility_;
  const BuyabilityModel& buyability_;
  ScenarioMatrix matrix_;
  SuccessTracker success_;
  std::size_t budget_;
  std::size_t calls_before_;
  std::chrono::steady_clock::time_point start_;
};

std::size_t expansion_cap(const PlannerConfig& config) {
  return config.max_expansions ? config.max_expansions : 20 * config.budget;
}

}  // namespace

SearchResult run_bfs(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                     const BuyabilityModel& buyability, const PlannerConfig& config, TierLookup tiers) {
  check(config);
  Search search(target, GraphMode::tree, std::move(tiers), model, feasibility, buyability, config);
  std::deque<NodeId> queue{search.graph().root()};
  while (true) {
    while (!queue.empty() && search.buy_marginal(queue.front()) >= 1.0) queue.pop_front();
    if (queue.empty()) {
      search.finish(Termination::empty_frontier);
      break;
    }
    if (search.out_of_budget() || search.result.expansions.size() >= expansion_cap(config)) {
      search.finish(Termination::budget);
      break;
    }
    const NodeId next = queue.front();
    queue.pop_front();
    auto added = search.expand(next, 0.0);
    if (!added) break;
    for (NodeId n : *added) {
      if (search.graph().node(n).is_molecule()) queue.push_back(n);
    }
  }
  return std::move(search.result);
}

SearchResult run_retro_star(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                            const BuyabilityModel& buyability, const Heuristic& heuristic,
                            const PlannerConfig& config, TierLookup tiers) {
  check(config);
  Search search(target, GraphMode::tree, std::move(tiers), model, feasibility, buyability, config);
  const AndOrGraph& graph = search.graph();
  std::vector<double> marginals;
  std::vector<double> h;
  NodeValues values;
  while (true) {
    for (auto id = static_cast<NodeId>(marginals.size()); id < graph.size(); ++id) {
      const Node& node = graph.node(id);
      marginals.push_back(node.is_molecule() ? search.buy_marginal(id) : feasibility.marginal(graph, id));
      h.push_back(node.is_molecule() ? heuristic.evaluate(node.molecule) : 0.0);
    }
    auto eligible = [&](NodeId m) { return marginals[m] < 1.0; };
    bool any = false;
    for (NodeId m : graph.frontier()) any = any || eligible(m);
    if (!any) {
      search.finish(Termination::empty_frontier);
      break;
    }
    if (search.out_of_budget() || search.result.expansions.size() >= expansion_cap(config)) {
      search.finish(Termination::budget);
      break;
    }
    propagate_expected(graph, marginals, h, values, config.propagation);
    const auto pick = select_next(graph, std::span<const double>(values.rho), eligible,
                                  [&](NodeId m) { return marginals[m]; });
    if (!search.expand(*pick, values.rho[*pick])) break;
  }
  return std::move(search.result);
}

double uct_score(double w, std::size_t n, double prior, std::size_t n_parent, double c) {
  const double mean = n == 0 ? 0.0 : w / static_cast<double>(n);
  return mean + c * prior * std::sqrt(static_cast<double>(n_parent)) / (1.0 + static_cast<double>(n));
}

namespace {

struct OrState {
  std::vector<NodeId> molecules;  // registry molecule ids, sorted
  std::vector<NodeId> reactions;  // path from the root state, sorted
  std::size_t depth = 0;
  double prior = 1.0;
  std::size_t visits = 0;
  double reward = 0.0;
  bool expanded = false;
  std::vector<std::size_t> children;
};

}  // namespace

SearchResult run_mcts(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                      const BuyabilityModel& buyability, const Heuristic& heuristic, const PlannerConfig& config,
                      const MctsConfig& mcts, TierLookup tiers, MctsStats* stats) {
  check(config);
  if (mcts.expand_after < 1 || mcts.max_depth < 1) {
    throw Error(ErrorKind::invalid_config, "MCTS expansion threshold and depth cap must be >= 1");
  }
  Search search(target, GraphMode::graph, std::move(tiers), model, feasibility, buyability, config);
  const AndOrGraph& registry = search.graph();
  const std::size_t max_sims = mcts.max_simulations ? mcts.max_simulations : 200 * config.budget;
  const std::size_t words = search.matrix().words();
  const double k = static_cast<double>(config.k);

  std::vector<double> buy;  // marginal buyability per registry molecule
  std::vector<double> h;
  auto refresh = [&]() {
    for (auto id = static_cast<NodeId>(buy.size()); id < registry.size(); ++id) {
      const Node& node = registry.node(id);
      buy.push_back(node.is_molecule() ? search.buy_marginal(id) : 0.0);
      h.push_back(node.is_molecule() ? heuristic.evaluate(node.molecule) : 0.0);
    }
  };
  refresh();

  auto open = [&](const OrState& s) {
    std::vector<NodeId> out;
    for (NodeId m : s.molecules) {
      if (buy[m] <= 0.0 && (out.empty() || out.back() != m)) out.push_back(m);
    }
    return out;
  };
  auto terminal = [&](const OrState& s) { return s.depth >= mcts.max_depth || open(s).empty(); };

  // Empirical success of the path plan: all reactions feasible and all leaves bought.
  auto plan_success = [&](const OrState& s) {
    std::size_t hits = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t bits = ~std::uint64_t{0};
      for (NodeId r : s.reactions) bits &= search.matrix().bits(r)[w];
      for (NodeId m : s.molecules) bits &= search.matrix().bits(m)[w];
      if (w + 1 == words && config.k % 64) bits &= (std::uint64_t{1} << (config.k % 64)) - 1;
      hits += static_cast<std::size_t>(std::popcount(bits));
    }
    return static_cast<double>(hits) / k;
  };
  auto partial_value = [&](const OrState& s) {
    std::vector<double> leaf_h;
    leaf_h.reserve(s.molecules.size());
    for (NodeId m : s.molecules) leaf_h.push_back(h[m]);
    return mcts_partial_value(s.reactions, s.molecules, leaf_h, search.matrix());
  };

  std::vector<OrState> states(1);
  states[0].molecules = {registry.root()};
  std::map<std::vector<NodeId>, std::size_t> plan_visits;
  bool stopped = false;

  // Calls the model on every open molecule not yet in the registry and adds one
  // child state per (molecule, reaction) pair. Returns false when the search
  // must stop (budget or model failure).
  auto expand_state = [&](std::size_t index, double score) {
    const auto todo = open(states[index]);
    for (NodeId m : todo) {
      if (!registry.is_frontier(m)) continue;
      if (search.out_of_budget() || search.result.expansions.size() >= expansion_cap(config)) {
        search.finish(Termination::budget);
        return false;
      }
      if (!search.expand(m, score)) return false;
      refresh();
    }
    states[index].expanded = true;
    for (NodeId m : todo) {
      for (NodeId r : registry.children(m)) {
        OrState child;
        const auto& parent = states[index];
        child.molecules = parent.molecules;
        child.molecules.erase(std::find(child.molecules.begin(), child.molecules.end(), m));
        for (NodeId reactant : registry.children(r)) child.molecules.push_back(reactant);
        std::sort(child.molecules.begin(), child.molecules.end());
        child.reactions = parent.reactions;
        child.reactions.insert(std::upper_bound(child.reactions.begin(), child.reactions.end(), r), r);
        child.depth = parent.depth + 1;
        child.prior = feasibility.marginal(registry, r);
        states.push_back(std::move(child));
        states[index].children.push_back(states.size() - 1);
      }
    }
    return true;
  };

  std::size_t sims = 0;
  std::vector<std::size_t> path;
  while (!stopped && sims < max_sims) {
    ++sims;
    path.assign(1, 0);
    std::size_t at = 0;
    while (states[at].expanded && !states[at].children.empty() && !terminal(states[at])) {
      std::size_t best = states[at].children.front();
      double best_score = -1.0;
      for (std::size_t c : states[at].children) {
        const auto& s = states[c];
        const double u = uct_score(s.reward, s.visits, s.prior, states[at].visits, mcts.exploration);
        if (u > best_score) {
          best = c;
          best_score = u;
        }
      }
      at = best;
      path.push_back(at);
    }

    double reward = 0.0;
    if (terminal(states[at])) {
      reward = plan_success(states[at]);
      if (++plan_visits[states[at].reactions] > mcts.reward_visits) reward = 0.0;
    } else if (!states[at].expanded) {
      reward = partial_value(states[at]);
      if (states[at].visits + 1 >= mcts.expand_after) stopped = !expand_state(at, reward);
    }
    // An expanded state with no children is a dead end and earns nothing.
    for (std::size_t s : path) {
      states[s].visits += 1;
      states[s].reward += reward;
    }
  }
  if (!stopped) search.finish(Termination::budget);
  if (stats) *stats = MctsStats{sims, states.size()};
  return std::move(search.result);
}

double plan_cost(const AndOrGraph& graph, const SynthesisPlan& plan, std::span<const double> marginals,
                 std::span<const double> h_cost) {
  double cost = 0.0;
  for (NodeId r : plan.reactions(graph)) cost += to_cost(marginals[r]);
  for (NodeId m : plan.frontier(graph)) {
    const double bought = to_cost(marginals[m]);
    cost += graph.is_frontier(m) ? std::min(bought, h_cost[m]) : bought;
  }
  return cost;
}

}  // namespace rfb
