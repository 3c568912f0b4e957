#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rfb/graph.hpp"
#include "rfb/heuristics.hpp"
#include "rfb/propagation.hpp"
#include "rfb/reaction_model.hpp"
#include "rfb/uncertainty.hpp"

namespace rfb {

enum class Termination : std::uint8_t { budget, empty_frontier, all_solved, error };
std::string_view to_string(Termination t) noexcept;
Termination parse_termination(std::string_view text);

struct TraceStep {
  std::size_t iteration = 0;  // 1-based expansion index
  NodeId selected = 0;
  std::string molecule;
  double alpha = 0.0;          // selection score (alpha, rho or UCT value depending on the search)
  double ssp = 0.0;            // search-matrix SSP estimate after the expansion
  std::size_t nodes = 0;       // graph size after the expansion
  std::size_t model_calls = 0; // backward-model calls used so far
  double elapsed_ms = 0.0;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct SearchTrace {
  double initial_ssp = 0.0;
  std::vector<TraceStep> steps;
  Termination termination = Termination::budget;
  std::string error;
};

void to_json(nlohmann::json& j, const TraceStep& s);
void from_json(const nlohmann::json& j, TraceStep& s);

struct PlannerConfig {
  std::size_t k = 256;
  std::size_t budget = 100;     // backward-model calls
  std::uint64_t seed = 0;       // search scenario matrix seed
  GraphMode mode = GraphMode::graph;
  PropagationOptions propagation;
  // Upper bound on expansions, guarding against models served from a warm cache.
  std::size_t max_expansions = 0;  // 0 means 20 * budget
};

struct SearchResult {
  AndOrGraph graph;
  SearchTrace trace;
  // Molecules in expansion order, used to replay the search.
  std::vector<NodeId> expansions;
};

// Greedy retro-fallback: repeatedly expand the frontier molecule with the
// largest expected improvement in SSP over the search scenarios. Molecules
// bought in every scenario are never expanded.
SearchResult run_retro_fallback(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                                const BuyabilityModel& buyability, const Heuristic& heuristic,
                                const PlannerConfig& config, TierLookup tiers = {});

}  // namespace rfb
