#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rfb/graph.hpp"
#include "rfb/success.hpp"
#include "rfb/uncertainty.hpp"

namespace rfb {

// Per-scenario psi and rho for every node, stored node-major:
// value[node * k + scenario].
struct NodeValues {
  std::size_t k = 0;
  std::size_t nodes = 0;
  std::vector<double> psi;
  std::vector<double> rho;

  double psi_at(NodeId n, std::size_t j) const { return psi[n * k + j]; }
  double rho_at(NodeId n, std::size_t j) const { return rho[n * k + j]; }
};

struct PropagationOptions {
  double tolerance = 1e-10;
  bool parallel = true;
  // Scenarios per work item of the parallel kernel.
  std::size_t block = 64;
};

// Single-scenario reference recursions. `outcome` holds f for reactions and b
// for molecules (0/1, or marginals for the pseudo-scenario used by retro*);
// `h` is read for frontier molecules only.
std::vector<double> compute_psi(const AndOrGraph& graph, std::span<const double> outcome, std::span<const double> h,
                                double tolerance = 1e-10);
std::vector<double> compute_psi(const AndOrGraph& graph, Outcomes outcome, std::span<const double> h,
                                double tolerance = 1e-10);
std::vector<double> compute_rho(const AndOrGraph& graph, std::span<const double> psi, double tolerance = 1e-10);

// All scenarios of `matrix` at once, parallel over scenario blocks.
void propagate(const AndOrGraph& graph, const ScenarioMatrix& matrix, std::span<const double> h, NodeValues& out,
               const PropagationOptions& options = {});
// Same contract, one scenario at a time through the reference recursions.
void propagate_serial(const AndOrGraph& graph, const ScenarioMatrix& matrix, std::span<const double> h,
                      NodeValues& out, double tolerance = 1e-10);
// Single pseudo-scenario with real-valued outcomes (k = 1).
void propagate_expected(const AndOrGraph& graph, std::span<const double> outcome, std::span<const double> h,
                        NodeValues& out, const PropagationOptions& options = {});

// Product of feasibilities over the plan's reactions times, for each plan
// leaf, max(b, h) if the leaf is on the graph frontier and b otherwise.
double sigma_bar_oracle(const AndOrGraph& graph, const SynthesisPlan& plan, std::span<const double> outcome,
                        std::span<const double> h);

// Expected improvement per node: mean over scenarios where the root is not yet
// solved of rho. Zero for nodes off the frontier.
std::vector<double> alpha(const AndOrGraph& graph, const SuccessTracker& success, const NodeValues& values);

// Frontier molecule with the largest score among those `eligible`; ties go to
// the smaller `tie_key(n)` (any ordered type), then the lower id.
template <class Eligible, class TieKey>
std::optional<NodeId> select_next(const AndOrGraph& graph, std::span<const double> score, Eligible eligible,
                                  TieKey tie_key) {
  std::optional<NodeId> best;
  double best_score = 0.0;
  decltype(tie_key(NodeId{})) best_key{};
  for (NodeId n : graph.frontier()) {
    if (!eligible(n)) continue;
    const double s = score[n];
    auto key = tie_key(n);
    if (!best || s > best_score || (s == best_score && key < best_key)) {
      best = n;
      best_score = s;
      best_key = std::move(key);
    }
  }
  return best;
}

}  // namespace rfb
