#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfb/graph.hpp"
#include "rfb/heuristics.hpp"
#include "rfb/planner.hpp"
#include "rfb/reaction_model.hpp"
#include "rfb/uncertainty.hpp"

namespace rfb {

// Breadth-first search on the AND/OR tree: frontier molecules are expanded in
// the order they were added. Molecules bought with certainty are skipped.
SearchResult run_bfs(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                     const BuyabilityModel& buyability, const PlannerConfig& config, TierLookup tiers = {});

// retro* with costs -ln E[f(r)] and -ln E[b(m)], frontier cost
// min(-ln E[b(m)], -ln h(m)). Runs the probability-space recursions on a
// single pseudo-scenario holding the marginals, where the largest rho is the
// smallest root-through cost.
SearchResult run_retro_star(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                            const BuyabilityModel& buyability, const Heuristic& heuristic,
                            const PlannerConfig& config, TierLookup tiers = {});

struct MctsConfig {
  double exploration = 0.01;
  std::size_t expand_after = 10;    // visits before a state is expanded
  std::size_t reward_visits = 100;  // visits per plan that still earn reward
  std::size_t max_depth = 10;
  std::size_t max_simulations = 0;  // 0 means 200 * budget
};

// c * P * sqrt(n_parent) / (1 + n) plus the mean reward w / n (0 when n = 0).
double uct_score(double w, std::size_t n, double prior, std::size_t n_parent, double c);

struct MctsStats {
  std::size_t simulations = 0;
  std::size_t states = 0;
};

// MCTS over an OR tree whose states are sorted molecule multisets. The result
// graph is the AND/OR graph (graph mode) of every reaction the tree touched,
// so it contains every plan found along a tree path.
SearchResult run_mcts(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                      const BuyabilityModel& buyability, const Heuristic& heuristic, const PlannerConfig& config,
                      const MctsConfig& mcts = {}, TierLookup tiers = {}, MctsStats* stats = nullptr);

// Additive retro* cost of a plan. `marginals` holds E[f] for reactions and
// E[b] for molecules; `h_cost` is read for leaves on the graph frontier.
double plan_cost(const AndOrGraph& graph, const SynthesisPlan& plan, std::span<const double> marginals,
                 std::span<const double> h_cost);

}  // namespace rfb
