#include "rfb/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>

#include "rfb/error.hpp"

namespace rfb {

namespace {

std::size_t sweep_limit(const AndOrGraph& graph) { return std::max<std::size_t>(2, 10 * graph.size()); }

[[noreturn]] void diverged(const char* what) {
  throw Error(ErrorKind::numerical, std::string(what) + " iteration did not converge after a reset");
}

[[noreturn]] void bad_ratio(NodeId r) {
  throw Error(ErrorKind::internal, "reaction " + std::to_string(r) + " has positive psi but its product has none");
}

}  // namespace

// ---------------------------------------------------------------- reference

std::vector<double> compute_psi(const AndOrGraph& graph, std::span<const double> outcome, std::span<const double> h,
                                double tolerance) {
  const auto n = graph.size();
  if (outcome.size() < n || h.size() < n) throw Error(ErrorKind::invalid_input, "inputs do not cover the graph");
  std::vector<double> psi(n, 0.0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::fill(psi.begin(), psi.end(), 0.0);
    for (std::size_t sweep = 0; sweep < sweep_limit(graph); ++sweep) {
      double change = 0.0;
      for (NodeId id = static_cast<NodeId>(n); id-- > 0;) {
        const Node& node = graph.node(id);
        double v;
        if (node.is_molecule()) {
          v = outcome[id];
          if (!node.expanded) {
            v = std::max(v, h[id]);
          } else {
            for (NodeId r : node.children) v = std::max(v, psi[r]);
          }
        } else {
          v = outcome[id];
          for (NodeId c : node.children) v *= psi[c];
        }
        change = std::max(change, std::abs(v - psi[id]));
        psi[id] = v;
      }
      if (change <= tolerance) return psi;
    }
  }
  diverged("psi");
}

std::vector<double> compute_psi(const AndOrGraph& graph, Outcomes outcome, std::span<const double> h,
                                double tolerance) {
  std::vector<double> values(outcome.begin(), outcome.end());
  return compute_psi(graph, std::span<const double>(values), h, tolerance);
}

std::vector<double> compute_rho(const AndOrGraph& graph, std::span<const double> psi, double tolerance) {
  const auto n = graph.size();
  if (psi.size() < n) throw Error(ErrorKind::invalid_input, "psi does not cover the graph");
  std::vector<double> rho(n, 0.0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::fill(rho.begin(), rho.end(), 0.0);
    for (std::size_t sweep = 0; sweep < sweep_limit(graph); ++sweep) {
      double change = 0.0;
      for (NodeId id = 0; id < n; ++id) {
        const Node& node = graph.node(id);
        double v = 0.0;
        if (id == graph.root()) {
          v = psi[id];
        } else if (node.is_molecule()) {
          for (NodeId r : node.parents) v = std::max(v, rho[r]);
        } else if (psi[id] > 0.0) {
          if (!(psi[node.product] > 0.0)) bad_ratio(id);
          v = rho[node.product] * psi[id] / psi[node.product];
        }
        change = std::max(change, std::abs(v - rho[id]));
        rho[id] = v;
      }
      if (change <= tolerance) return rho;
    }
  }
  diverged("rho");
}

void propagate_serial(const AndOrGraph& graph, const ScenarioMatrix& matrix, std::span<const double> h,
                      NodeValues& out, double tolerance) {
  const auto n = graph.size();
  const auto k = matrix.k();
  out.k = k;
  out.nodes = n;
  out.psi.assign(n * k, 0.0);
  out.rho.assign(n * k, 0.0);
  std::vector<double> outcome(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (NodeId id = 0; id < n; ++id) outcome[id] = matrix.outcome(id, j) ? 1.0 : 0.0;
    auto psi = compute_psi(graph, std::span<const double>(outcome), h, tolerance);
    auto rho = compute_rho(graph, psi, tolerance);
    for (NodeId id = 0; id < n; ++id) {
      out.psi[id * k + j] = psi[id];
      out.rho[id * k + j] = rho[id];
    }
  }
}

// ---------------------------------------------------------------- kernel

namespace {

// Computes psi and rho for scenarios [j0, j1) with blocked inner loops.
// `outcome(id, j)` yields f or b as a double.
template <class Outcome>
void propagate_block(const AndOrGraph& graph, const TraversalOrder& order, std::size_t k, std::size_t j0,
                     std::size_t j1, const Outcome& outcome, std::span<const double> h, double tolerance, double* psi,
                     double* rho) {
  const std::size_t width = j1 - j0;
  std::vector<double> tmp(width);

  using Component = TraversalOrder::Component;
  auto psi_pass = [&](const Component& comp) {
    double change = 0.0;
    for (std::size_t i = comp.begin; i < comp.end; ++i) {
      const NodeId id = order.postorder[i];
      const Node& node = graph.node(id);
      for (std::size_t j = 0; j < width; ++j) tmp[j] = outcome(id, j0 + j);
      if (node.is_molecule()) {
        if (!node.expanded) {
          for (std::size_t j = 0; j < width; ++j) tmp[j] = std::max(tmp[j], h[id]);
        } else {
          for (NodeId r : node.children) {
            const double* src = psi + r * k + j0;
            for (std::size_t j = 0; j < width; ++j) tmp[j] = std::max(tmp[j], src[j]);
          }
        }
      } else {
        for (NodeId c : node.children) {
          const double* src = psi + c * k + j0;
          for (std::size_t j = 0; j < width; ++j) tmp[j] *= src[j];
        }
      }
      double* dst = psi + id * k + j0;
      for (std::size_t j = 0; j < width; ++j) {
        change = std::max(change, std::abs(tmp[j] - dst[j]));
        dst[j] = tmp[j];
      }
    }
    return change;
  };

  auto rho_pass = [&](const Component& comp) {
    double change = 0.0;
    for (std::size_t i = comp.end; i-- > comp.begin;) {
      const NodeId id = order.postorder[i];
      const Node& node = graph.node(id);
      if (id == graph.root()) {
        std::copy_n(psi + id * k + j0, width, tmp.begin());
      } else if (node.is_molecule()) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (NodeId r : node.parents) {
          const double* src = rho + r * k + j0;
          for (std::size_t j = 0; j < width; ++j) tmp[j] = std::max(tmp[j], src[j]);
        }
      } else {
        const double* own = psi + id * k + j0;
        const double* prod_psi = psi + node.product * k + j0;
        const double* prod_rho = rho + node.product * k + j0;
        for (std::size_t j = 0; j < width; ++j) {
          if (own[j] > 0.0) {
            if (!(prod_psi[j] > 0.0)) bad_ratio(id);
            tmp[j] = prod_rho[j] * own[j] / prod_psi[j];
          } else {
            tmp[j] = 0.0;
          }
        }
      }
      double* dst = rho + id * k + j0;
      for (std::size_t j = 0; j < width; ++j) {
        change = std::max(change, std::abs(tmp[j] - dst[j]));
        dst[j] = tmp[j];
      }
    }
    return change;
  };

  // Cycles are swept to convergence one component at a time.
  auto solve = [&](const Component& comp, double* values, auto pass, const char* what) {
    if (!comp.cyclic) {
      pass(comp);
      return;
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
      for (std::size_t i = comp.begin; i < comp.end; ++i) std::fill_n(values + order.postorder[i] * k + j0, width, 0.0);
      for (std::size_t sweep = 0; sweep < sweep_limit(graph); ++sweep) {
        if (pass(comp) <= tolerance) return;
      }
    }
    diverged(what);
  };
  for (const auto& comp : order.components) solve(comp, psi, psi_pass, "psi");
  for (auto it = order.components.rbegin(); it != order.components.rend(); ++it) solve(*it, rho, rho_pass, "rho");
}

template <class Outcome>
void run_blocks(const AndOrGraph& graph, std::size_t k, const Outcome& outcome, std::span<const double> h,
                NodeValues& out, const PropagationOptions& options) {
  const auto n = graph.size();
  if (h.size() < n) throw Error(ErrorKind::invalid_input, "heuristic values do not cover the graph");
  out.k = k;
  out.nodes = n;
  out.psi.assign(n * k, 0.0);
  out.rho.assign(n * k, 0.0);
  const TraversalOrder order = traversal_order(graph);
  const std::size_t block = std::max<std::size_t>(1, options.block);
  const auto blocks = static_cast<std::int64_t>((k + block - 1) / block);

  std::exception_ptr failure;
  std::mutex failure_lock;
#pragma omp parallel for schedule(static) if (options.parallel && blocks > 1)
  for (std::int64_t b = 0; b < blocks; ++b) {
    try {
      const std::size_t j0 = static_cast<std::size_t>(b) * block;
      const std::size_t j1 = std::min(k, j0 + block);
      propagate_block(graph, order, k, j0, j1, outcome, h, options.tolerance, out.psi.data(), out.rho.data());
    } catch (...) {
      std::lock_guard<std::mutex> guard(failure_lock);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void propagate(const AndOrGraph& graph, const ScenarioMatrix& matrix, std::span<const double> h, NodeValues& out,
               const PropagationOptions& options) {
  if (!matrix.covers(graph)) throw Error(ErrorKind::precondition, "scenario matrix does not cover the graph");
  std::vector<const std::uint64_t*> rows(graph.size());
  for (NodeId id = 0; id < graph.size(); ++id) rows[id] = matrix.bits(id).data();
  auto outcome = [&rows](NodeId id, std::size_t j) { return static_cast<double>((rows[id][j / 64] >> (j % 64)) & 1U); };
  run_blocks(graph, matrix.k(), outcome, h, out, options);
}

void propagate_expected(const AndOrGraph& graph, std::span<const double> outcome, std::span<const double> h,
                        NodeValues& out, const PropagationOptions& options) {
  if (outcome.size() < graph.size()) throw Error(ErrorKind::invalid_input, "outcomes do not cover the graph");
  auto value = [outcome](NodeId id, std::size_t) { return outcome[id]; };
  run_blocks(graph, 1, value, h, out, options);
}

// ---------------------------------------------------------------- selection

double sigma_bar_oracle(const AndOrGraph& graph, const SynthesisPlan& plan, std::span<const double> outcome,
                        std::span<const double> h) {
  double v = 1.0;
  for (NodeId r : plan.reactions(graph)) v *= outcome[r];
  for (NodeId m : plan.frontier(graph)) {
    v *= graph.is_frontier(m) ? std::max(outcome[m], h[m]) : outcome[m];
  }
  return v;
}

std::vector<double> alpha(const AndOrGraph& graph, const SuccessTracker& success, const NodeValues& values) {
  const auto k = values.k;
  if (success.k() != k) throw Error(ErrorKind::invalid_input, "success and value widths differ");
  std::vector<double> out(graph.size(), 0.0);
  const auto root_bits = success.bits(graph.root());
  for (NodeId m : graph.frontier()) {
    double total = 0.0;
    const double* rho = values.rho.data() + m * k;
    for (std::size_t j = 0; j < k; ++j) {
      if (!((root_bits[j / 64] >> (j % 64)) & 1U)) total += rho[j];
    }
    out[m] = total / static_cast<double>(k);
  }
  return out;
}

}  // namespace rfb
