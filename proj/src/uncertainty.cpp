#include "rfb/uncertainty.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include "rfb/error.hpp"
#include "rfb/random.hpp"

namespace rfb {

double rank_marginal(int rank) {
  if (rank < 1) throw Error(ErrorKind::invalid_input, "reaction rank must be >= 1, got " + std::to_string(rank));
  return std::min(0.75, 0.75 / (static_cast<double>(rank) / 10.0));
}

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "quantile level outside [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::string_view to_string(FeasibilityKind kind) noexcept {
  switch (kind) {
    case FeasibilityKind::constant: return "constant";
    case FeasibilityKind::rank: return "rank";
    case FeasibilityKind::gp_constant: return "gp-constant";
    case FeasibilityKind::gp_rank: return "gp-rank";
  }
  return "?";
}

std::string_view to_string(BuyabilityKind kind) noexcept {
  return kind == BuyabilityKind::binary ? "binary" : "stochastic";
}

FeasibilityKind parse_feasibility_kind(std::string_view text) {
  for (auto k : {FeasibilityKind::constant, FeasibilityKind::rank, FeasibilityKind::gp_constant, FeasibilityKind::gp_rank}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorKind::invalid_config, "unknown feasibility kind '" + std::string(text) + "'");
}

BuyabilityKind parse_buyability_kind(std::string_view text) {
  if (text == "binary") return BuyabilityKind::binary;
  if (text == "stochastic") return BuyabilityKind::stochastic;
  throw Error(ErrorKind::invalid_config, "unknown buyability kind '" + std::string(text) + "'");
}

double tier_buyability(std::optional<int> tier, BuyabilityKind kind) {
  if (!tier) return 0.0;
  if (*tier < 0 || *tier > 5) throw Error(ErrorKind::invalid_input, "purchase tier must be in 0..5");
  if (*tier <= 2) return 1.0;
  if (kind == BuyabilityKind::binary) return 0.0;
  static constexpr double slow[] = {0.5, 0.2, 0.05};
  return slow[*tier - 3];
}

void ModelConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_config, "feasibility.p must be in [0, 1]");
  if (k < 1) throw Error(ErrorKind::invalid_config, "k must be >= 1");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"feasibility", {{"kind", to_string(c.feasibility)}, {"p", c.p}}},
                     {"buyability", {{"kind", to_string(c.buyability)}}},
                     {"k", c.k},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig out;
  try {
    if (j.contains("feasibility")) {
      const auto& f = j.at("feasibility");
      if (f.contains("kind")) out.feasibility = parse_feasibility_kind(f.at("kind").get<std::string>());
      if (f.contains("p")) out.p = f.at("p").get<double>();
    }
    if (j.contains("buyability") && j.at("buyability").contains("kind")) {
      out.buyability = parse_buyability_kind(j.at("buyability").at("kind").get<std::string>());
    }
    if (j.contains("k")) {
      const auto& k = j.at("k");
      if (!k.is_number_integer() || k.get<std::int64_t>() < 1) {
        throw Error(ErrorKind::invalid_config, "k must be a positive integer");
      }
      out.k = j.at("k").get<std::size_t>();
    }
    if (j.contains("seed")) out.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("model config: ") + e.what());
  }
  out.validate();
  c = out;
}

// ---------------------------------------------------------------- matrix

Eigen::MatrixXd LatentState::factor_view() const {
  const auto n = static_cast<Eigen::Index>(size());
  if (n == 0) return {};
  return factor.topLeftCorner(n, n).triangularView<Eigen::Lower>();
}

ScenarioMatrix::ScenarioMatrix(std::size_t k, std::uint64_t seed) : k_(k), seed_(seed) {
  if (k == 0) throw Error(ErrorKind::invalid_config, "scenario count must be >= 1");
}

std::span<const std::uint64_t> ScenarioMatrix::bits(NodeId id) const {
  if (!has_row(id)) throw Error(ErrorKind::not_found, "no scenario row for node " + std::to_string(id));
  return rows_[id];
}

std::span<const double> ScenarioMatrix::latent(NodeId id) const {
  if (!has_row(id)) throw Error(ErrorKind::not_found, "no scenario row for node " + std::to_string(id));
  return latent_[id];
}

double ScenarioMatrix::mean(NodeId id) const {
  std::size_t ones = 0;
  for (auto w : bits(id)) ones += static_cast<std::size_t>(std::popcount(w));
  return static_cast<double>(ones) / static_cast<double>(k_);
}

void ScenarioMatrix::set_row(NodeId id, std::vector<std::uint64_t> bits, std::vector<double> latent) {
  if (has_row(id)) throw Error(ErrorKind::precondition, "scenario row for node " + std::to_string(id) + " already set");
  if (bits.size() != words()) throw Error(ErrorKind::invalid_input, "scenario row has the wrong width");
  if (!latent.empty() && latent.size() != k_) throw Error(ErrorKind::invalid_input, "latent row has the wrong width");
  if (k_ % 64) bits.back() &= (std::uint64_t{1} << (k_ % 64)) - 1;
  if (id >= rows_.size()) {
    rows_.resize(id + 1);
    latent_.resize(id + 1);
    present_.resize(id + 1, false);
  }
  rows_[id] = std::move(bits);
  latent_[id] = std::move(latent);
  present_[id] = true;
}

void ScenarioMatrix::set_outcomes(NodeId id, std::span<const std::uint8_t> outcomes) {
  if (outcomes.size() != k_) throw Error(ErrorKind::invalid_input, "outcome row has the wrong width");
  std::vector<std::uint64_t> row(words(), 0);
  for (std::size_t j = 0; j < k_; ++j) {
    if (outcomes[j]) row[j / 64] |= std::uint64_t{1} << (j % 64);
  }
  set_row(id, std::move(row));
}

bool ScenarioMatrix::covers(const AndOrGraph& graph) const {
  for (NodeId n = 0; n < graph.size(); ++n) {
    if (!has_row(n)) return false;
  }
  return true;
}

std::vector<std::uint8_t> ScenarioMatrix::column(std::size_t scenario, std::size_t node_count) const {
  std::vector<std::uint8_t> out(node_count);
  for (NodeId n = 0; n < node_count; ++n) out[n] = outcome(n, scenario) ? 1 : 0;
  return out;
}

std::uint64_t content_key(const AndOrGraph& graph, NodeId id) {
  const Node& n = graph.node(id);
  if (n.is_molecule()) return rng::combine(0x6d6f6cULL, rng::hash_string(n.molecule));
  return rng::combine(0x72786eULL, rng::hash_string(graph.reaction_key(id)));
}

// ---------------------------------------------------------------- marginals

MarginalFn constant_marginal(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_config, "constant marginal must be in [0, 1]");
  return [p](const AndOrGraph&, NodeId) { return p; };
}

MarginalFn rank_based_marginal() {
  return [](const AndOrGraph& g, NodeId r) { return rank_marginal(g.node(r).rank); };
}

MarginalFn tier_marginal(BuyabilityKind kind) {
  return [kind](const AndOrGraph& g, NodeId m) { return tier_buyability(g.node(m).purchase_tier, kind); };
}

// ---------------------------------------------------------------- sampling

namespace {

constexpr std::uint64_t kIndependentSalt = 0x696e64ULL;
constexpr std::uint64_t kLatentSalt = 0x6c6174ULL;

std::vector<NodeId> missing(const ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> nodes,
                            NodeKind kind) {
  std::vector<NodeId> out;
  for (NodeId n : nodes) {
    if (graph.node(n).kind != kind) {
      throw Error(ErrorKind::invalid_input, "node " + std::to_string(n) + " has the wrong kind for this model");
    }
    if (!matrix.has_row(n) && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
  return out;
}

}  // namespace

void sample_independent_rows(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> nodes,
                             const MarginalFn& marginal) {
  for (NodeId n : nodes) {
    if (matrix.has_row(n)) continue;
    const double p = marginal(graph, n);
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "marginal outside [0, 1]");
    const std::uint64_t stream = rng::combine(rng::combine(matrix.seed(), kIndependentSalt), content_key(graph, n));
    std::vector<std::uint64_t> row(matrix.words(), 0);
    for (std::size_t j = 0; j < matrix.k(); ++j) {
      if (rng::uniform(stream, j) < p) row[j / 64] |= std::uint64_t{1} << (j % 64);
    }
    matrix.set_row(n, std::move(row));
  }
}

void IndependentFeasibility::extend(ScenarioMatrix& matrix, const AndOrGraph& graph,
                                    std::span<const NodeId> reactions) const {
  sample_independent_rows(matrix, graph, missing(matrix, graph, reactions, NodeKind::reaction), marginal_);
}

void IndependentBuyability::extend(ScenarioMatrix& matrix, const AndOrGraph& graph,
                                   std::span<const NodeId> molecules) const {
  sample_independent_rows(matrix, graph, missing(matrix, graph, molecules, NodeKind::molecule), marginal_);
}

double LatentGpFeasibility::kernel(const ReactionFingerprints& a, NodeId ida, const ReactionFingerprints& b,
                                   NodeId idb) const {
  if (kernel_ == GpKernel::identity) return ida == idb ? 1.0 : 0.0;
  return reaction_kernel(a, b);
}

void LatentGpFeasibility::extend(ScenarioMatrix& matrix, const AndOrGraph& graph,
                                 std::span<const NodeId> reactions) const {
  const auto fresh = missing(matrix, graph, reactions, NodeKind::reaction);
  if (fresh.empty()) return;
  LatentState& st = matrix.latent_state();
  const auto n_old = static_cast<Eigen::Index>(st.size());
  const auto n_new = static_cast<Eigen::Index>(fresh.size());
  const auto k = static_cast<Eigen::Index>(matrix.k());

  std::vector<ReactionFingerprints> features;
  Eigen::VectorXd mean(n_new);
  for (Eigen::Index i = 0; i < n_new; ++i) {
    const NodeId r = fresh[static_cast<std::size_t>(i)];
    const Node& node = graph.node(r);
    std::vector<std::string> reactants;
    for (NodeId c : node.children) reactants.push_back(graph.node(c).molecule);
    features.push_back(reaction_fingerprints(graph.node(node.product).molecule, reactants));
    const double p = marginal_(graph, r);
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "marginal outside [0, 1]");
    // Finite latent means keep the conditioning well defined at p = 0 or 1.
    mean(i) = normal_quantile(std::clamp(p, 1e-12, 1.0 - 1e-12));
  }

  Eigen::MatrixXd cross(n_old, n_new);
  for (Eigen::Index i = 0; i < n_old; ++i) {
    for (Eigen::Index j = 0; j < n_new; ++j) {
      cross(i, j) = kernel(st.features[static_cast<std::size_t>(i)], st.reactions[static_cast<std::size_t>(i)],
                           features[static_cast<std::size_t>(j)], fresh[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::MatrixXd self(n_new, n_new);
  for (Eigen::Index i = 0; i < n_new; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      self(i, j) = self(j, i) = kernel(features[static_cast<std::size_t>(i)], fresh[static_cast<std::size_t>(i)],
                                       features[static_cast<std::size_t>(j)], fresh[static_cast<std::size_t>(j)]);
    }
  }

  // Block update: L_new = [[L, 0], [B^T, C]] with B = L^-1 K_on and
  // C C^T = K_nn + jitter - B^T B.
  Eigen::MatrixXd solved(n_old, n_new);
  if (n_old > 0) solved = st.factor.topLeftCorner(n_old, n_old).triangularView<Eigen::Lower>().solve(cross);
  Eigen::MatrixXd schur = self;
  if (n_old > 0) schur.noalias() -= solved.transpose() * solved;
  Eigen::MatrixXd lower;
  bool ok = false;
  for (double jitter = kJitter; jitter <= kMaxJitter * 1.0001; jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(schur + jitter * Eigen::MatrixXd::Identity(n_new, n_new));
    if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
      lower = llt.matrixL();
      ok = true;
      break;
    }
  }
  if (!ok) throw Error(ErrorKind::numerical, "kernel matrix extension is not positive definite after jitter");

  Eigen::MatrixXd noise(n_new, k);
  for (Eigen::Index i = 0; i < n_new; ++i) {
    rng::Stream rs(rng::combine(rng::combine(matrix.seed(), kLatentSalt), content_key(graph, fresh[static_cast<std::size_t>(i)])));
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < k; ++j) noise(i, j) = normal(rs);
  }
  Eigen::MatrixXd latent = lower * noise;
  latent.colwise() += mean;
  if (n_old > 0) latent.noalias() += solved.transpose() * st.whitened.topRows(n_old);

  const Eigen::Index total = n_old + n_new;
  if (st.factor.rows() < total) {
    const Eigen::Index cap = std::max<Eigen::Index>(total, 2 * st.factor.rows());
    st.factor.conservativeResize(cap, cap);
    st.whitened.conservativeResize(cap, k);
  }
  st.factor.block(0, n_old, n_old, n_new).setZero();
  st.factor.block(n_old, 0, n_new, n_old) = solved.transpose();
  st.factor.block(n_old, n_old, n_new, n_new) = lower;
  st.whitened.middleRows(n_old, n_new) = noise;
  for (Eigen::Index i = 0; i < n_new; ++i) {
    st.reactions.push_back(fresh[static_cast<std::size_t>(i)]);
    st.features.push_back(std::move(features[static_cast<std::size_t>(i)]));
  }

  for (Eigen::Index i = 0; i < n_new; ++i) {
    std::vector<std::uint64_t> row(matrix.words(), 0);
    std::vector<double> z(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
      z[static_cast<std::size_t>(j)] = latent(i, j);
      if (latent(i, j) > 0.0) row[static_cast<std::size_t>(j) / 64] |= std::uint64_t{1} << (j % 64);
    }
    matrix.set_row(fresh[static_cast<std::size_t>(i)], std::move(row), std::move(z));
  }
}

std::unique_ptr<FeasibilityModel> make_feasibility(const ModelConfig& config) {
  config.validate();
  switch (config.feasibility) {
    case FeasibilityKind::constant: return std::make_unique<IndependentFeasibility>(constant_marginal(config.p));
    case FeasibilityKind::rank: return std::make_unique<IndependentFeasibility>(rank_based_marginal());
    case FeasibilityKind::gp_constant: return std::make_unique<LatentGpFeasibility>(constant_marginal(config.p));
    case FeasibilityKind::gp_rank: return std::make_unique<LatentGpFeasibility>(rank_based_marginal());
  }
  throw Error(ErrorKind::internal, "unhandled feasibility kind");
}

std::unique_ptr<BuyabilityModel> make_buyability(const ModelConfig& config) {
  return std::make_unique<IndependentBuyability>(tier_marginal(config.buyability));
}

void extend(ScenarioMatrix& matrix, const AndOrGraph& graph, std::span<const NodeId> added,
            const FeasibilityModel& feasibility, const BuyabilityModel& buyability) {
  std::vector<NodeId> reactions;
  std::vector<NodeId> molecules;
  for (NodeId n : added) {
    if (matrix.has_row(n)) continue;
    (graph.node(n).is_reaction() ? reactions : molecules).push_back(n);
  }
  if (!reactions.empty()) feasibility.extend(matrix, graph, reactions);
  if (!molecules.empty()) buyability.extend(matrix, graph, molecules);
}

void cover(ScenarioMatrix& matrix, const AndOrGraph& graph, const FeasibilityModel& feasibility,
           const BuyabilityModel& buyability) {
  std::vector<NodeId> all(graph.size());
  for (NodeId n = 0; n < graph.size(); ++n) all[n] = n;
  extend(matrix, graph, all, feasibility, buyability);
}

}  // namespace rfb
