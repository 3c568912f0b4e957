#include "rfb/planner.hpp"

#include <algorithm>
#include <chrono>

#include <nlohmann/json.hpp>

#include "rfb/error.hpp"
#include "rfb/success.hpp"

namespace rfb {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::budget: return "budget";
    case Termination::empty_frontier: return "empty-frontier";
    case Termination::all_solved: return "all-solved";
    case Termination::error: return "error";
  }
  return "?";
}

Termination parse_termination(std::string_view text) {
  for (auto t : {Termination::budget, Termination::empty_frontier, Termination::all_solved, Termination::error}) {
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorKind::invalid_input, "unknown termination reason '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const TraceStep& s) {
  j = nlohmann::json{{"iteration", s.iteration}, {"selected", s.selected}, {"molecule", s.molecule},
                     {"alpha", s.alpha},         {"ssp", s.ssp},           {"nodes", s.nodes},
                     {"model_calls", s.model_calls}, {"elapsed_ms", s.elapsed_ms}};
}

void from_json(const nlohmann::json& j, TraceStep& s) {
  s.iteration = j.at("iteration").get<std::size_t>();
  s.selected = j.at("selected").get<NodeId>();
  s.molecule = j.at("molecule").get<std::string>();
  s.alpha = j.at("alpha").get<double>();
  s.ssp = j.at("ssp").get<double>();
  s.nodes = j.at("nodes").get<std::size_t>();
  s.model_calls = j.at("model_calls").get<std::size_t>();
  s.elapsed_ms = j.at("elapsed_ms").get<double>();
}

SearchResult run_retro_fallback(const std::string& target, BackwardModel& model, const FeasibilityModel& feasibility,
                                const BuyabilityModel& buyability, const Heuristic& heuristic,
                                const PlannerConfig& config, TierLookup tiers) {
  if (config.budget < 1) throw Error(ErrorKind::invalid_config, "budget must be >= 1");
  if (config.k < 1) throw Error(ErrorKind::invalid_config, "k must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t max_expansions = config.max_expansions ? config.max_expansions : 20 * config.budget;

  SearchResult result{AndOrGraph(target, config.mode, std::move(tiers)), {}, {}};
  AndOrGraph& graph = result.graph;
  ScenarioMatrix matrix(config.k, config.seed);
  cover(matrix, graph, feasibility, buyability);
  SuccessTracker success(config.k);
  success.update(graph, matrix);
  result.trace.initial_ssp = success.ssp();

  std::vector<double> h;
  std::vector<double> buy;
  auto refresh = [&]() {
    for (NodeId id = static_cast<NodeId>(h.size()); id < graph.size(); ++id) {
      const Node& node = graph.node(id);
      h.push_back(node.is_molecule() ? heuristic.evaluate(node.molecule) : 0.0);
      buy.push_back(node.is_molecule() ? buyability.marginal(graph, id) : 0.0);
    }
  };
  refresh();
  // Expanding a molecule that is bought in every scenario never adds a plan.
  auto eligible = [&](NodeId m) { return buy[m] < 1.0; };

  const std::size_t calls_before = model.call_count();
  NodeValues values;
  while (true) {
    if (success.all_solved()) {
      result.trace.termination = Termination::all_solved;
      break;
    }
    const auto frontier = graph.frontier();
    if (std::none_of(frontier.begin(), frontier.end(), eligible)) {
      result.trace.termination = Termination::empty_frontier;
      break;
    }
    if (model.call_count() - calls_before >= config.budget || result.expansions.size() >= max_expansions) {
      result.trace.termination = Termination::budget;
      break;
    }
    propagate(graph, matrix, h, values, config.propagation);
    const auto scores = alpha(graph, success, values);
    const auto pick = select_next(graph, scores, eligible, [&](NodeId n) { return buy[n]; });
    if (!pick) {
      result.trace.termination = Termination::empty_frontier;
      break;
    }
    std::vector<Proposal> proposals;
    try {
      proposals = model.propose(graph.node(*pick).molecule);
      const auto added = graph.expand(*pick, proposals);
      extend(matrix, graph, added, feasibility, buyability);
    } catch (const Error& e) {
      result.trace.termination = Termination::error;
      result.trace.error = e.what();
      break;
    }
    result.expansions.push_back(*pick);
    success.update(graph, matrix);
    refresh();

    TraceStep step;
    step.iteration = result.expansions.size();
    step.selected = *pick;
    step.molecule = graph.node(*pick).molecule;
    step.alpha = scores[*pick];
    step.ssp = success.ssp();
    step.nodes = graph.size();
    step.model_calls = model.call_count() - calls_before;
    step.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.steps.push_back(std::move(step));
  }
  return result;
}

}  // namespace rfb
