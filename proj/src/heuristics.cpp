#include "rfb/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfb/error.hpp"

namespace rfb {

DifficultyScorer length_difficulty(std::size_t max_length) {
  if (max_length == 0) throw Error(ErrorKind::invalid_config, "difficulty scorer needs a positive maximum length");
  return [max_length](std::string_view m) {
    const double raw = 1.0 + 9.0 * static_cast<double>(m.size()) / static_cast<double>(max_length);
    return std::clamp(raw, 1.0, 10.0);
  };
}

double difficulty_value(double score) {
  if (!(score >= 1.0 && score <= 10.0)) {
    throw Error(ErrorKind::invalid_input, "difficulty score " + std::to_string(score) + " outside [1, 10]");
  }
  return 1.0 - (score - 1.0) / 10.0;
}

std::unique_ptr<Heuristic> make_heuristic(std::string_view name, std::size_t max_length) {
  if (name == "optimistic") return std::make_unique<OptimisticHeuristic>();
  if (name == "difficulty") return std::make_unique<DifficultyHeuristic>(length_difficulty(max_length));
  throw Error(ErrorKind::invalid_config, "unknown heuristic '" + std::string(name) + "'");
}

double to_cost(double h) {
  if (!(h >= 0.0 && h <= 1.0)) throw Error(ErrorKind::invalid_input, "heuristic value outside [0, 1]");
  if (h == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(h);
}

double mcts_partial_value(std::span<const NodeId> reactions, std::span<const NodeId> leaves,
                          std::span<const double> leaf_h, const ScenarioMatrix& matrix) {
  if (leaf_h.size() != leaves.size()) throw Error(ErrorKind::invalid_input, "one heuristic value per leaf expected");
  double total = 0.0;
  for (std::size_t j = 0; j < matrix.k(); ++j) {
    bool feasible = true;
    for (NodeId r : reactions) feasible = feasible && matrix.outcome(r, j);
    if (!feasible) continue;
    double v = 1.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!matrix.outcome(leaves[i], j)) v *= leaf_h[i];
    }
    total += v;
  }
  return total / static_cast<double>(matrix.k());
}

}  // namespace rfb
