#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rfb/graph.hpp"
#include "rfb/planner.hpp"
#include "rfb/reaction_model.hpp"
#include "rfb/rivals.hpp"
#include "rfb/uncertainty.hpp"

namespace rfb {

inline constexpr int kSchemaVersion = 1;
std::string_view software_version() noexcept;

enum class Algorithm : std::uint8_t { retro_fallback, bfs, retro_star, mcts };
std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view text);

struct ExperimentConfig {
  std::vector<std::uint64_t> world_seeds{0};
  WorldParams world;  // `seed` is replaced by each entry of world_seeds
  // Explicit targets, used for every world; otherwise `target_count` are generated.
  std::vector<std::string> targets;
  std::size_t target_count = 100;
  int target_min_length = 8;
  int target_max_length = 12;

  Algorithm algorithm = Algorithm::retro_fallback;
  std::string heuristic = "optimistic";
  GraphMode search_graph = GraphMode::graph;  // retro-fallback only; baselines search trees
  ModelConfig model;  // model.k is the search sample count
  std::size_t budget = 200;
  std::size_t analysis_k = 10000;
  std::size_t trials = 3;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string output;
  MctsConfig mcts;

  // Throws invalid_config naming the offending field path.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct Metrics {
  double ssp = 0.0;
  double best_plan = 0.0;             // empirical success of the most feasible single plan
  std::optional<std::size_t> shortest;  // reactions in the shortest plan with nonzero success
  bool solved = false;
  std::size_t nodes = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct CurvePoint {
  std::size_t iteration = 0;
  std::size_t model_calls = 0;
  double ssp = 0.0;         // analysis-matrix estimate
  double search_ssp = 0.0;  // the search's own estimate (search-matrix scenarios)

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct RunRecord {
  std::uint64_t world_seed = 0;
  std::string target;
  std::size_t trial = 0;
  std::uint64_t search_seed = 0;
  Termination termination = Termination::budget;
  std::string error;
  std::vector<std::string> expansions;  // expanded molecules in order
  std::vector<CurvePoint> curve;        // curve[0] is before the first expansion
  std::size_t search_nodes = 0;  // size of the search graph itself
  Metrics metrics;
  double wall_ms = 0.0;  // search only, without the analysis replay
};

struct ExperimentRecord {
  int schema_version = kSchemaVersion;
  std::string software;
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  double wall_ms = 0.0;
};

void to_json(nlohmann::json& j, const Metrics& m);
void from_json(const nlohmann::json& j, Metrics& m);
void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);
void to_json(nlohmann::json& j, const ExperimentRecord& r);
void from_json(const nlohmann::json& j, ExperimentRecord& r);

// Seeds of the search and analysis scenario matrices. They come from disjoint
// streams; the analysis seed ignores the algorithm, k and the trial.
std::uint64_t search_seed(const ExperimentConfig& config, std::uint64_t world_seed, std::size_t trial);
std::uint64_t analysis_seed(const ExperimentConfig& config, std::uint64_t world_seed);

// Targets for one world: the explicit list, or generated ones.
std::vector<std::string> experiment_targets(const ExperimentConfig& config, std::uint64_t world_seed);

// Metrics of a graph under an analysis matrix covering it.
Metrics compute_metrics(const AndOrGraph& graph, const ScenarioMatrix& matrix);

// Runs one (world, target, trial) job.
RunRecord run_single(const ExperimentConfig& config, std::uint64_t world_seed, const std::string& target,
                     std::size_t trial);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// All worlds x targets x trials on `config.jobs` workers, merged in job order.
ExperimentRecord run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

// Record files: JSON with a schema version, plus a CSV of curve points.
void emit_results(const ExperimentRecord& record, const std::string& path);
ExperimentRecord load_results(const std::string& path);
// One row per curve point: run, iteration, budget_used, ssp.
void write_curve_csv(const std::vector<ExperimentRecord>& records, std::ostream& out);

struct ScalingCell {
  std::string feasibility;
  std::string heuristic;
  std::size_t points = 0;
  double exponent = 0.0;
  double intercept = 0.0;
};

// Least-squares fit of log(time) = exponent * log(nodes) + intercept.
ScalingCell fit_scaling(const std::vector<std::pair<double, double>>& nodes_and_ms);
// One fit of search time against search graph size per (feasibility model,
// heuristic) cell; cells with too few runs are left out.
std::vector<ScalingCell> scaling_report(const std::vector<ExperimentRecord>& records);

}  // namespace rfb
