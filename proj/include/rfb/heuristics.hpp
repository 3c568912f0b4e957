#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "rfb/graph.hpp"
#include "rfb/uncertainty.hpp"

namespace rfb {

// Estimated probability that expanding a frontier molecule leads to a
// successful plan for it. Values are in [0, 1].
class Heuristic {
 public:
  virtual ~Heuristic() = default;
  virtual double evaluate(std::string_view molecule) const = 0;
  virtual std::string name() const = 0;
};

class OptimisticHeuristic final : public Heuristic {
 public:
  double evaluate(std::string_view) const override { return 1.0; }
  std::string name() const override { return "optimistic"; }
};

// Synthetic-accessibility-like difficulty in [1, 10].
using DifficultyScorer = std::function<double(std::string_view)>;

// clamp(1 + 9 * len / max_length, 1, 10)
DifficultyScorer length_difficulty(std::size_t max_length);

// 1 - (score - 1) / 10; the score must lie in [1, 10].
double difficulty_value(double score);

class DifficultyHeuristic final : public Heuristic {
 public:
  explicit DifficultyHeuristic(DifficultyScorer scorer) : scorer_(std::move(scorer)) {}
  double evaluate(std::string_view molecule) const override { return difficulty_value(scorer_(molecule)); }
  std::string name() const override { return "difficulty"; }

 private:
  DifficultyScorer scorer_;
};

// "optimistic" or "difficulty" (the latter scored by molecule length).
std::unique_ptr<Heuristic> make_heuristic(std::string_view name, std::size_t max_length);

// Cost-scale reading of a heuristic value: -ln h, +inf at h = 0.
double to_cost(double h);

// Partial-plan value for tree search: the mean over scenarios of
// min_r f(r) times the product of h(m) over plan leaves not bought in that
// scenario. An empty reaction set contributes a factor of 1.
double mcts_partial_value(std::span<const NodeId> reactions, std::span<const NodeId> leaves,
                          std::span<const double> leaf_h, const ScenarioMatrix& matrix);

}  // namespace rfb
