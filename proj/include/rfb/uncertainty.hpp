#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rfb/fingerprint.hpp"
#include "rfb/graph.hpp"

namespace rfb {

// min(0.75, 0.75 / (rank / 10)): the rank formula capped at the top-reaction value.
double rank_marginal(int rank);

// Standard normal quantile; returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

enum class FeasibilityKind : std::uint8_t { constant, rank, gp_constant, gp_rank };
enum class BuyabilityKind : std::uint8_t { binary, stochastic };

std::string_view to_string(FeasibilityKind kind) noexcept;
std::string_view to_string(BuyabilityKind kind) noexcept;
FeasibilityKind parse_feasibility_kind(std::string_view text);
BuyabilityKind parse_buyability_kind(std::string_view text);

// Purchase probability of an inventory tier. Absent tier means not buyable.
double tier_buyability(std::optional<int> tier, BuyabilityKind kind);

struct ModelConfig {
  FeasibilityKind feasibility = FeasibilityKind::constant;
  double p = 0.5;
  BuyabilityKind buyability = BuyabilityKind::binary;
  std::size_t k = 256;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Cached state of the latent Gaussian feasibility model: the Cholesky factor
// of the kernel matrix over sampled reactions and the whitened draws
// (rows of L^-1 (z - mu)), both grown in blocks.
struct LatentState {
  std::vector<NodeId> reactions;
  std::vector<ReactionFingerprints> features;
  Eigen::MatrixXd factor;    // capacity x capacity, lower triangle used
  Eigen::MatrixXd whitened;  // capacity x k
  std::size_t size() const noexcept { return reactions.size(); }
  Eigen::MatrixXd factor_view() const;  // size x size copy of the used block
};

// k scenarios of binary outcomes, one bit row per graph node (feasibility for
// reactions, buyability for molecules). Rows are written once and never change.
class ScenarioMatrix {
 public:
  ScenarioMatrix(std::size_t k, std::uint64_t seed);

  std::size_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t words() const noexcept { return (k_ + 63) / 64; }

  bool has_row(NodeId id) const noexcept { return id < present_.size() && present_[id]; }
  std::span<const std::uint64_t> bits(NodeId id) const;
  bool outcome(NodeId id, std::size_t scenario) const {
    return (bits(id)[scenario / 64] >> (scenario % 64)) & 1U;
  }
  // Latent values for correlated models; empty otherwise.
  std::span<const double> latent(NodeId id) const;
  double mean(NodeId id) const;

  void set_row(NodeId id, std::vector<std::uint64_t> bits, std::vector<double> latent = {});
  void set_outcomes(NodeId id, std::span<const std::uint8_t> outcomes);

  bool covers(const AndOrGraph& graph) const;
  // Outcomes of one scenario for nodes [0, node_count).
  std::vector<std::uint8_t> column(std::size_t scenario, std::size_t node_count) const;

  LatentState& latent_state() noexcept { return latent_state_; }
  const LatentState& latent_state() const noexcept { return latent_state_; }

 private:
  std::size_t k_;
  std::uint64_t seed_;
  std::vector<std::vector<std::uint64_t>> rows_;
  std::vector<std::vector<double>> latent_;
  std::vector<bool> present_;
  LatentState latent_state_;
};

// Content-derived stream key: the same molecule or reaction gets the same
// samples regardless of node id or graph mode.
std::uint64_t content_key(const AndOrGraph& graph, NodeId id);

using MarginalFn = std::function<double(const AndOrGraph&, NodeId)>;
MarginalFn constant_marginal(double p);
MarginalFn rank_based_marginal();
MarginalFn tier_marginal(BuyabilityKind kind);

class FeasibilityModel {
 public:
  virtual ~FeasibilityModel() = default;
  virtual double marginal(const AndOrGraph& graph, NodeId reaction) const = 0;
  // Samples rows for reactions that have none yet, conditioning on existing rows.
  virtual void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> reactions) const = 0;
};

class BuyabilityModel {
 public:
  virtual ~BuyabilityModel() = default;
  virtual double marginal(const AndOrGraph& graph, NodeId molecule) const = 0;
  virtual void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> molecules) const = 0;
};

// Writes Bernoulli(p) rows from per-node counter streams of the master seed.
void sample_independent_rows(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> nodes,
                             const MarginalFn& marginal);

class IndependentFeasibility final : public FeasibilityModel {
 public:
  explicit IndependentFeasibility(MarginalFn marginal) : marginal_(std::move(marginal)) {}
  double marginal(const AndOrGraph& graph, NodeId reaction) const override { return marginal_(graph, reaction); }
  void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> reactions) const override;

 private:
  MarginalFn marginal_;
};

enum class GpKernel : std::uint8_t { reaction_jaccard, identity };

// Thresholded latent Gaussian process: z ~ GP(Phi^-1(p), K), outcome = z > 0.
// New reactions are drawn from the conditional given the stored draws, with
// the Cholesky factor grown by a block update.
class LatentGpFeasibility final : public FeasibilityModel {
 public:
  explicit LatentGpFeasibility(MarginalFn marginal, GpKernel kernel = GpKernel::reaction_jaccard)
      : marginal_(std::move(marginal)), kernel_(kernel) {}
  double marginal(const AndOrGraph& graph, NodeId reaction) const override { return marginal_(graph, reaction); }
  void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> reactions) const override;

  static constexpr double kJitter = 1e-8;
  static constexpr double kMaxJitter = 1e-4;

 private:
  double kernel(const ReactionFingerprints& a, NodeId ida, const ReactionFingerprints& b, NodeId idb) const;
  MarginalFn marginal_;
  GpKernel kernel_;
};

class IndependentBuyability final : public BuyabilityModel {
 public:
  explicit IndependentBuyability(MarginalFn marginal) : marginal_(std::move(marginal)) {}
  double marginal(const AndOrGraph& graph, NodeId molecule) const override { return marginal_(graph, molecule); }
  void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> molecules) const override;

 private:
  MarginalFn marginal_;
};

std::unique_ptr<FeasibilityModel> make_feasibility(const ModelConfig& config);
std::unique_ptr<BuyabilityModel> make_buyability(const ModelConfig& config);

// Samples rows for every node of `graph` that lacks one, in id order.
void cover(ScenarioMatrix& matrix, const AndOrGraph& graph, const FeasibilityModel& feasibility,
           const BuyabilityModel& buyability);
// Samples rows for the listed nodes (typically the ids returned by expand).
void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> added,
            const FeasibilityModel& feasibility, const BuyabilityModel& buyability);

}  // namespace rfb
